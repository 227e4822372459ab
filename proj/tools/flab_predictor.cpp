// Reference external predictor: answers framed requests on stdin/stdout with a
// morphological inpainting of the observed map. Useful for exercising the wire
// protocol end to end and as a template for wrapping a learned model.
#include <CLI11.hpp>

#include <unistd.h>

#include <chrono>
#include <iostream>
#include <thread>

#include "frontier_lab/predictor.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Stdio predictor speaking the framed occupancy protocol"};
    int radius = 5;
    int delay_ms = 0;
    app.add_option("--radius", radius, "Inpainting radius in cells")->check(CLI::NonNegativeNumber);
    app.add_option("--delay-ms", delay_ms, "Artificial latency per request")->check(CLI::NonNegativeNumber);
    CLI11_PARSE(app, argc, argv);

    namespace protocol = flab::protocol;
    try {
        std::string payload;
        while (protocol::read_frame(STDIN_FILENO, payload)) {
            const auto observed = protocol::decode_request(payload);
            if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
            const auto prediction = flab::morphological_inpaint(observed, radius);
            protocol::write_frame(STDOUT_FILENO, protocol::encode_response(prediction));
        }
    } catch (const std::exception& e) {
        std::cerr << "flab_predictor: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
