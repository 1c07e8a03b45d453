// fastread: simulate active-learning screening, rank treatments, plot recall
// curves and serve interactive review sessions.

#include "fastread/corpus.hpp"
#include "fastread/eval.hpp"
#include "fastread/features.hpp"
#include "fastread/report.hpp"
#include "fastread/service.hpp"
#include "fastread/stopwords.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace fastread;

namespace {

fs::path workspace_root(const std::string& flag) {
    if (const char* env = std::getenv("FASTREAD_WORKSPACE"); env && *env) return env;
    return flag;
}

// A data path as given, or relative to <workspace>/data.
fs::path resolve_data(const std::string& data, const fs::path& workspace) {
    if (fs::exists(data)) return data;
    if (fs::exists(workspace / "data" / data)) return workspace / "data" / data;
    if (fs::exists(workspace / data)) return workspace / data;
    return data;
}

std::vector<TreatmentCode> parse_treatments(const std::vector<std::string>& names) {
    std::vector<TreatmentCode> codes;
    for (const auto& name : names) {
        if (name == "all") {
            for (const auto& code : TreatmentCode::all()) codes.push_back(code);
            continue;
        }
        const auto code = TreatmentCode::parse(name);
        if (!code) throw CLI::ValidationError("--treatment", "unknown treatment " + name);
        codes.push_back(*code);
    }
    return codes;
}

void print_warnings(const Corpus& corpus) {
    for (const auto& w : corpus.warnings) std::cerr << "warning: " << w << '\n';
}

ReviewServer* g_server = nullptr;

extern "C" void handle_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active-learning support for primary study selection"};
    app.require_subcommand(0, 1);

    std::string workspace_flag = "workspace";
    app.add_option("--workspace", workspace_flag,
                   "Workspace root (overridden by FASTREAD_WORKSPACE)");
    bool print_stopwords = false;
    app.add_flag("--print-stopwords", print_stopwords, "Print the embedded stop-word list and exit");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulate reviews against oracle labels");
    std::string sim_data;
    std::vector<std::string> sim_treatments{"HUTM"};
    std::size_t repeats = 30;
    std::uint64_t base_seed = 1;
    double target_recall = 0.95;
    std::size_t max_terms = kDefaultMaxTerms;
    std::string out_path;
    std::size_t jobs = 1;
    std::size_t batch = 1;
    sim->add_option("--data", sim_data, "Labeled corpus CSV")->required();
    sim->add_option("--treatment", sim_treatments, "Treatment code(s), 'linear' or 'all'");
    sim->add_option("--repeats", repeats, "Repeats per treatment")->check(CLI::PositiveNumber);
    sim->add_option("--seed", base_seed, "First seed");
    sim->add_option("--target-recall", target_recall, "Recall to reach")->check(CLI::Range(0.0, 1.0));
    sim->add_option("--max-terms", max_terms, "Vocabulary size")->check(CLI::PositiveNumber);
    sim->add_option("--out", out_path, "Run log (JSON lines, appended; existing runs are skipped)");
    sim->add_option("--jobs", jobs, "Parallel simulations")->check(CLI::PositiveNumber);
    sim->add_option("--batch", batch, "Studies queried per retrain")->check(CLI::PositiveNumber);

    // rank
    auto* rank = app.add_subcommand("rank", "Scott-Knott ranking of run logs");
    std::vector<std::string> logs;
    std::string json_out;
    int bootstrap = 512;
    rank->add_option("logs", logs, "Run logs")->required();
    rank->add_option("--json", json_out, "Also write the report as JSON");
    rank->add_option("--bootstrap", bootstrap, "Bootstrap resamples")->check(CLI::PositiveNumber);

    // plot
    auto* plot = app.add_subcommand("plot", "Recall-vs-reviewed curves as SVG and CSV");
    std::vector<std::string> plot_logs;
    std::string svg_out = "curves.svg";
    std::string csv_out = "curves.csv";
    std::vector<std::string> plot_treatments;
    plot->add_option("logs", plot_logs, "Run logs")->required();
    plot->add_option("--svg", svg_out, "SVG output");
    plot->add_option("--csv", csv_out, "CSV output");
    plot->add_option("--treatment", plot_treatments, "Only these treatments");

    // serve
    auto* serve = app.add_subcommand("serve", "Run the review service");
    int port = 5000;
    std::string host = "127.0.0.1";
    std::string static_dir;
    serve->add_option("--port", port, "TCP port")->check(CLI::Range(0, 65535));
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--static", static_dir, "Directory of web assets to serve at /");

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "Candidate and relevant counts");
    std::string stats_data;
    stats_cmd->add_option("--data", stats_data, "Corpus CSV")->required();

    CLI11_PARSE(app, argc, argv);

    const fs::path workspace = workspace_root(workspace_flag);

    if (print_stopwords) {
        std::cout << "# " << stoplist_version() << '\n';
        for (auto word : english_stopwords()) std::cout << word << '\n';
        return 0;
    }

    try {
        if (*sim) {
            const auto codes = parse_treatments(sim_treatments);
            const Corpus corpus = load_csv(resolve_data(sim_data, workspace));
            print_warnings(corpus);
            if (!corpus.fully_labeled() || corpus.relevant_ids().empty()) {
                std::cerr << "error: simulate needs every study labeled and at least one relevant\n";
                return 2;
            }
            TreatmentConfig config;
            config.target_recall = target_recall;
            SimulationOptions options;
            options.batch = batch;

            const auto done = out_path.empty() ? decltype(logged_keys(out_path)){} : logged_keys(out_path);
            const FeatureMatrix features = featurize(corpus, max_terms);
            for (const auto& code : codes) {
                // run only the seeds missing from the log, keeping seed order
                std::vector<std::uint64_t> seeds;
                for (std::size_t k = 0; k < repeats; ++k) {
                    if (!done.contains({code.to_string(), base_seed + k})) seeds.push_back(base_seed + k);
                }
                std::vector<SimulationResult> results;
                for (std::size_t start = 0; start < seeds.size();) {
                    std::size_t end = start + 1;
                    while (end < seeds.size() && seeds[end] == seeds[end - 1] + 1) ++end;
                    auto part = repeat(corpus, features, code, config, end - start, seeds[start], options, jobs);
                    results.insert(results.end(), part.begin(), part.end());
                    start = end;
                }
                if (results.empty()) continue;
                if (out_path.empty()) {
                    for (const auto& r : results) std::cout << to_json(r).dump() << '\n';
                } else {
                    append_run_log(out_path, results);
                }
                std::vector<double> x95;
                for (const auto& r : results) x95.push_back(static_cast<double>(r.x95));
                const auto summary = median_iqr(x95);
                std::cerr << corpus.name() << ' ' << code.to_string() << ": median X95 "
                          << summary.median << " (iqr " << summary.iqr << ") over " << results.size()
                          << " runs\n";
            }
            return 0;
        }

        if (*rank) {
            std::vector<SimulationResult> all;
            for (const auto& path : logs) {
                auto part = read_run_log(path);
                all.insert(all.end(), part.begin(), part.end());
            }
            ScottKnottOptions sk;
            sk.bootstrap_samples = bootstrap;
            const RankReport report = rank_report(all, sk);
            std::cout << format_table(report);
            if (!json_out.empty()) {
                std::ofstream out(json_out, std::ios::binary | std::ios::trunc);
                out << to_json(report).dump(2) << '\n';
                if (!out) throw std::runtime_error("cannot write " + json_out);
            }
            return 0;
        }

        if (*plot) {
            std::vector<SimulationResult> all;
            for (const auto& path : plot_logs) {
                for (auto& r : read_run_log(path)) {
                    const auto name = r.treatment.to_string();
                    if (plot_treatments.empty() ||
                        std::find(plot_treatments.begin(), plot_treatments.end(), name) != plot_treatments.end()) {
                        all.push_back(std::move(r));
                    }
                }
            }
            const auto runs = median_runs(all);
            std::ofstream(svg_out, std::ios::binary | std::ios::trunc) << curves_svg(runs);
            std::ofstream(csv_out, std::ios::binary | std::ios::trunc) << curves_csv(runs);
            std::cerr << "wrote " << svg_out << " and " << csv_out << '\n';
            return 0;
        }

        if (*serve) {
            SessionStore store(workspace);
            for (const auto& e : store.recovery_errors) std::cerr << "warning: " << e << '\n';
            std::optional<fs::path> assets;
            if (!static_dir.empty()) assets = static_dir;
            ReviewServer server(store, assets);
            if (!server.bind(host, port)) {
                std::cerr << "error: cannot bind " << host << ':' << port << '\n';
                return 1;
            }
            g_server = &server;
            std::signal(SIGINT, handle_signal);
            std::signal(SIGTERM, handle_signal);
            std::cerr << "serving " << store.ids().size() << " session(s) from " << workspace.string()
                      << " on http://" << host << ':' << server.port() << '\n';
            server.listen();
            g_server = nullptr;
            return 0;
        }

        if (*stats_cmd) {
            const Corpus corpus = load_csv(resolve_data(stats_data, workspace));
            print_warnings(corpus);
            const CorpusStats s = stats(corpus);
            std::cout << "candidates " << s.candidates << '\n'
                      << "relevant " << (s.relevant ? std::to_string(*s.relevant) : "unknown") << '\n';
            return 0;
        }

        std::cout << app.help();
        return 0;
    } catch (const CorpusError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
