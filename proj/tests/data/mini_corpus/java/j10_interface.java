interface Shape {
    int area();
}
