struct point {
    int x;
    int y;
};

int sum_point(struct point p) {
    return p.x + p.y;
}
