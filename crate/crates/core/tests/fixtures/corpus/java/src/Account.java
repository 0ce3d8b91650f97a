package bank;

/**
 * A bank account.
 */
public class Account {
    private long balance;

    /**
     * Creates an account that starts with the given opening balance in cents.
     */
    public Account(long opening) {
        if (opening < 0) {
            throw new IllegalArgumentException("negative opening balance");
        }
        this.balance = opening;
    }

    /**
     * Returns a readable description containing the balance formatted in dollars.
     */
    @Override
    public String toString() {
        return "Account(" + (balance / 100.0) + ")";
    }

    public long cents() {
        return balance;
    }
}
