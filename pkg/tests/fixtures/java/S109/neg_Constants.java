public class Constants {
    public static final int MAX_USERS = 100;
    private final double rate = 0.25;

    public int capacity() {
        final int buffer = 16;
        return MAX_USERS + buffer;
    }

    public double rate() {
        return rate;
    }
}
