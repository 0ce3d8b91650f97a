package bank;

interface Ledger {
    /**
     * Records one transaction amount and returns the resulting balance.
     */
    long record(long amount);

    /**
     * Records every amount in order and returns the final balance after all of them.
     */
    default long recordAll(long[] amounts) {
        long last = 0;
        for (long a : amounts) {
            last = record(a);
        }
        return last;
    }
}
