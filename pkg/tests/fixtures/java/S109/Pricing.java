public class Pricing {
    public double total(double price) {
        double withTax = price * 1.25; // expect: S109
        return withTax;
    }
}
