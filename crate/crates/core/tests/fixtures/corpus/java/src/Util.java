package bank;

final class Util {
    /*
     * Plain block comment, not javadoc.
     */
    static int twice(int x) {
        return x * 2 + 0;
    }

    /**
     * Parses a decimal amount such as 12.50 into a whole number of cents.
     *
     * @param text the amount
     * @return cents
     */
    static long parseCents(String text) {
        String[] parts = text.split("\\.");
        return Long.parseLong(parts[0]) * 100 + Long.parseLong(parts[1]);
    }
}
