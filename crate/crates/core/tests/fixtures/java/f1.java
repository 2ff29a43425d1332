package demo;

public class F1 {
    public static int alpha(int x) {
        return x * x + 1;
    }

    public static int beta(int x, int y) {
        int total = x + y;
        return total * 2;
    }
}
