import java.util.Random;

public class References {
    private final Random random;

    public References(Random random) {
        this.random = random;
    }

    public Class<?> type() {
        return Random.class;
    }

    public RandomGenerator make() {
        return new RandomGenerator(random);
    }

    static class RandomGenerator {
        private final Random source;

        RandomGenerator(Random source) {
            this.source = source;
        }
    }
}
