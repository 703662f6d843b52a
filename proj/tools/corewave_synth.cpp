#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "corewave/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Write a synthetic archive (price indices and component panel) for demos and tests"};
    std::string out = "data/synthetic";
    std::uint64_t seed = 20061010;
    std::string start = "1960-01";
    int months = 505;
    app.add_option("--out", out, "Archive directory")->capture_default_str();
    app.add_option("--seed", seed, "Random seed")->capture_default_str();
    app.add_option("--start", start, "First month of the price indices (YYYY-MM)")->capture_default_str();
    app.add_option("--months", months, "Number of index months")->capture_default_str()->check(CLI::Range(25, 100000));
    CLI11_PARSE(app, argc, argv);

    const auto ym = corewave::YearMonth::parse(start);
    if (!ym) {
        std::cerr << "corewave_synth: bad --start " << start << "\n";
        return 2;
    }
    try {
        const auto archive = corewave::synthetic::make_archive({*ym, months, seed});
        corewave::synthetic::write_archive(out, archive);
    } catch (const corewave::Error& e) {
        std::cerr << "corewave_synth: " << e.what() << "\n";
        return 3;
    }
    std::cout << "wrote synthetic archive to " << out << "\n";
    return 0;
}
