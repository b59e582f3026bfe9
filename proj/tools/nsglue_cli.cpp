#include <cstdio>

int main() {
    std::puts("nsglue: no subcommand");
    return 2;
}
