interface Shape {
    double area();

    String UNIT = "cm"; // expect: S1213
}

enum Color {
    RED, GREEN;

    public String lower() {
        return name().toLowerCase();
    }

    private String code; // expect: S1213
}

class Outer {
    private int x;

    static class Inner {
        void run() {
        }

        int y; // expect: S1213
    }

    int x() {
        return x;
    }
}
