// Command-line surface: simulate a reservoir system on a stored stream,
// build an epsilon-close cycle-reservoir approximant, and verify closeness
// between two systems on seeded streams. Exit code 0 means the command's
// verdict is pass/success; every source of randomness is seed-controlled.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "scrkit/harness.hpp"
#include "scrkit/io.hpp"
#include "scrkit/pipeline.hpp"
#include "scrkit/reservoir.hpp"

namespace {

std::size_t default_max_dim() {
    if (const char* env = std::getenv("SCRKIT_MAX_DIM")) {
        try {
            return static_cast<std::size_t>(std::stoull(env));
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring unparsable SCRKIT_MAX_DIM='" << env << "'\n";
        }
    }
    return scrkit::kDefaultMaxStateDim;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cycle-reservoir approximation toolkit"};
    app.require_subcommand(1);

    // simulate
    std::string sim_system, sim_stream, sim_trace;
    CLI::App* simulate = app.add_subcommand("simulate", "Run a system on a stream and write the trace");
    simulate->add_option("system", sim_system, "system JSON file")->required();
    simulate->add_option("stream", sim_stream, "stream CSV file")->required();
    simulate->add_option("out-trace", sim_trace, "output trace CSV file")->required();

    // build
    std::string build_system, build_out_system, build_out_budget;
    std::string build_target = "cscr", build_mode = "analytic";
    double build_epsilon = 0.1, build_bound = 1.0;
    std::size_t build_max_dim = default_max_dim();
    std::uint64_t build_seed = scrkit::kDefaultValidationSeed;
    std::vector<double> build_split;
    CLI::App* build = app.add_subcommand("build", "Construct an epsilon-close cycle reservoir");
    build->add_option("system", build_system, "input system JSON file")->required();
    build->add_option("out-system", build_out_system, "output system JSON file")->required();
    build->add_option("out-budget", build_out_budget, "output budget JSON file")->required();
    build->add_option("--target", build_target, "smcr | cscr | twin")->capture_default_str();
    build->add_option("--epsilon", build_epsilon, "output closeness tolerance")->capture_default_str();
    build->add_option("--bound", build_bound, "input stream bound M")->capture_default_str();
    build->add_option("--mode", build_mode, "analytic | empirical")->capture_default_str();
    build->add_option("--max-dim", build_max_dim, "state dimension cap")->capture_default_str();
    build->add_option("--seed", build_seed, "validation stream seed (empirical mode)")
        ->capture_default_str();
    build
        ->add_option("--split", build_split,
                     "relative stage weights: dilate,cyclize,terminal (default equal)")
        ->delimiter(',')
        ->expected(3);

    // verify
    std::string verify_a, verify_b, verify_report;
    double verify_epsilon = 0.1;
    std::size_t verify_streams = 64, verify_length = 64;
    std::uint64_t verify_seed = 1;
    CLI::App* verify = app.add_subcommand("verify", "Measure epsilon-closeness of two systems");
    verify->add_option("system-a", verify_a, "first system JSON file")->required();
    verify->add_option("system-b", verify_b, "second system JSON file")->required();
    verify->add_option("out-report", verify_report, "output report JSON file")->required();
    verify->add_option("--epsilon", verify_epsilon, "closeness tolerance")->capture_default_str();
    verify->add_option("--streams", verify_streams, "number of random streams")->capture_default_str();
    verify->add_option("--length", verify_length, "stream length")->capture_default_str();
    verify->add_option("--bound", build_bound, "input stream bound M")->capture_default_str();
    verify->add_option("--seed", verify_seed, "stream seed")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            const scrkit::LinearReservoirSystem r = scrkit::load_system(sim_system);
            const scrkit::InputStream u = scrkit::load_stream(sim_stream);
            scrkit::save_trace(scrkit::run(r, u), sim_trace);
            std::cout << "trace written to " << sim_trace << "\n";
            return 0;
        }
        if (build->parsed()) {
            const scrkit::LinearReservoirSystem r = scrkit::load_system(build_system);
            scrkit::StageSplit split;
            if (build_split.size() == 3) {
                split = {build_split[0], build_split[1], build_split[2]};
            }
            const scrkit::PipelineResult result = scrkit::synthesize(
                r, build_epsilon, build_bound, scrkit::target_from_string(build_target),
                scrkit::mode_from_string(build_mode), build_max_dim, build_seed, split);
            scrkit::save_system(result.system, build_out_system);
            scrkit::save_json(scrkit::pipeline_result_to_json(result), build_out_budget);
            std::cout << "built " << build_target << " with state dimension "
                      << result.system.state_dim() << ", certificate total "
                      << result.certificate_total() << "\n";
            return 0;
        }
        if (verify->parsed()) {
            const scrkit::LinearReservoirSystem a = scrkit::load_system(verify_a);
            const scrkit::LinearReservoirSystem b = scrkit::load_system(verify_b);
            const auto streams =
                scrkit::random_streams(a.input_dim(), build_bound, verify_length, verify_streams,
                                       verify_seed);
            const scrkit::ClosenessReport report =
                scrkit::measure_closeness(a, b, streams, verify_epsilon);
            scrkit::save_json(scrkit::closeness_report_to_json(report), verify_report);
            std::cout << (report.pass ? "pass" : "fail") << ": max deviation " << report.max_deviation
                      << " (+ tail " << report.tail_bound << ") vs epsilon " << report.epsilon << "\n";
            return report.pass ? 0 : 1;
        }
    } catch (const scrkit::ResourceError& e) {
        std::cerr << "error: " << e.what() << " (required dimension " << e.required_dimension()
                  << ")\n";
        return 2;
    } catch (const scrkit::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
