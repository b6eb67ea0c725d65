public class FieldAfterMethod {
    void m() {
    }

    int f; // expect: S1213
}
