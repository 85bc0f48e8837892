enum mode {
    MODE_OFF,
    MODE_ON
};

int is_on(enum mode m) {
    return m == MODE_ON;
}
