class Grid {
    static int cells(int rows, int cols) {
        int count = 0;
        for (int r = 0; r < rows; r++) {
            for (int k = 0; k < cols; k++) {
                count++;
            }
        }
        return count;
    }
}
