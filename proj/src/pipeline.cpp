#include "refinerkit/pipeline.hpp"

#include <csignal>

namespace refinerkit {
namespace {

std::atomic<bool> g_interrupted{false};

void on_interrupt(int) { g_interrupted.store(true); }

}  // namespace

const std::atomic<bool>* install_interrupt_handler() {
    std::signal(SIGINT, on_interrupt);
    return &g_interrupted;
}

}  // namespace refinerkit
