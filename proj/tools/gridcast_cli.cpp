// placeholder; filled in once the library settles
int main() { return 0; }
