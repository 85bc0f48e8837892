enum Direction {
    NORTH,
    SOUTH;

    static boolean isNorth(Direction d) {
        return d == NORTH;
    }
}
