class MaxOf {
    static int max2(int a, int b) {
        int winner = a > b ? a : b;
        return winner;
    }
}
