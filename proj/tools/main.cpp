#include <cstdio>
int main() { std::puts("pathweaver"); return 0; }
