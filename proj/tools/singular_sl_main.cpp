#include <cstdio>

int main() {
    std::puts("singular-sl: CLI not wired up yet");
    return 1;
}
