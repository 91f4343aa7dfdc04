// sampdist command line: build samples, answer distance queries, run
// evaluation sweeps, and cache OC estimator tables.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sampdist/evaluate.hpp"
#include "sampdist/oc.hpp"
#include "sampdist/query.hpp"
#include "sampdist/sampler.hpp"

namespace {

sampdist::Instance load_instance(const std::string& path, std::uint32_t id) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file '" + path + "'");
    return sampdist::ingest(in, id);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted-sample distance estimation"};
    app.require_subcommand(1);

    // --- sample ---
    auto* sample = app.add_subcommand("sample", "sample an instance file");
    std::string in_path, out_path, scheme = "poisson_pps", mode = "coordinated";
    std::uint32_t instance_id = 1;
    std::uint64_t hash_seed = 1;
    double T = 0.0, expected_size = 0.0;
    std::size_t k = 0;
    sample->add_option("--input", in_path, "instance file (key<TAB>value)")->required();
    sample->add_option("--output", out_path, "sample file to write")->required();
    sample->add_option("--scheme", scheme, "poisson_pps | priority")
        ->check(CLI::IsMember({"poisson_pps", "priority"}));
    sample->add_option("--instance-id", instance_id, "instance id recorded in the sample");
    sample->add_option("--hash-seed", hash_seed, "global hash seed");
    sample->add_option("--mode", mode, "independent | coordinated")
        ->check(CLI::IsMember({"independent", "coordinated"}));
    sample->add_option("--threshold", T, "Poisson threshold T");
    sample->add_option("--expected-size", expected_size, "solve T for this expected sample size");
    sample->add_option("--size", k, "priority sample size k");

    // --- estimate ---
    auto* estimate = app.add_subcommand("estimate", "estimate a distance from sample files");
    std::vector<std::string> sample_paths;
    std::string estimator = "coord_l", predicate = "all", oc_path, one_sided;
    double p = 1.0;
    bool root = false;
    estimate->add_option("--samples", sample_paths, "sample files (two or more)")->required()->expected(-2);
    estimate->add_option("--estimator", estimator, "ind_l | coord_l | coord_u | coord_oc");
    estimate->add_option("--p", p, "exponent p > 0");
    estimate->add_option("--predicate", predicate, "all | set:k1,k2 | prefix:xy");
    estimate->add_option("--oc-table", oc_path, "OC table file (for coord_oc)");
    estimate->add_option("--one-sided", one_sided, "plus | minus")
        ->check(CLI::IsMember({"plus", "minus"}));
    estimate->add_flag("--lp", root, "report L_p (p-th root; biased) instead of L_p^p");

    // --- evaluate ---
    auto* evaluate = app.add_subcommand("evaluate", "run a Monte Carlo evaluation sweep");
    std::string config_path, csv_path;
    evaluate->add_option("--config", config_path, "experiment config (JSON)")->required();
    evaluate->add_option("--output", csv_path, "CSV output path (default: from config, else stdout)");

    // --- oc-table ---
    auto* octab = app.add_subcommand("oc-table", "build and cache an OC estimator table");
    double oc_p = 1.0, oc_xmin = 1e-4;
    int oc_res = 2000;
    std::string oc_out;
    octab->add_option("--p", oc_p, "exponent p > 0");
    octab->add_option("--resolution", oc_res, "grid points (>= 100)");
    octab->add_option("--x-min", oc_xmin, "smallest normalized bound in the grid");
    octab->add_option("--output", oc_out, "table file to write")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sample) {
            sampdist::Instance inst = load_instance(in_path, instance_id);
            sampdist::HashConfig hc{hash_seed, mode == "independent" ? sampdist::Mode::independent
                                                                     : sampdist::Mode::coordinated};
            sampdist::InstanceSample s;
            if (scheme == "poisson_pps") {
                if (expected_size > 0.0) T = sampdist::pps_threshold_for_expected_size(inst, expected_size);
                if (!(T > 0.0)) throw std::runtime_error("need --threshold or --expected-size");
                s = sampdist::poisson_pps_sample(inst, T, hc);
            } else {
                if (k == 0) throw std::runtime_error("need --size for priority sampling");
                s = sampdist::priority_sample(inst, k, hc);
            }
            std::ofstream out(out_path);
            if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
            sampdist::write_sample(s, out);
            std::cerr << "sampled " << s.sampled.size() << " of " << inst.positive_count()
                      << " keys\n";
        } else if (*estimate) {
            std::vector<sampdist::InstanceSample> samples;
            for (const auto& path : sample_paths) {
                std::ifstream in(path);
                if (!in) throw std::runtime_error("cannot open sample '" + path + "'");
                samples.push_back(sampdist::read_sample(in));
            }
            auto pred = sampdist::KeyPredicate::parse(predicate);
            auto kind = sampdist::parse_estimator(estimator);
            std::optional<sampdist::OCTable> oc;
            if (!oc_path.empty()) {
                std::ifstream in(oc_path);
                if (!in) throw std::runtime_error("cannot open OC table '" + oc_path + "'");
                oc = sampdist::oc_load(in);
            }
            sampdist::EstimateReport rep;
            if (!one_sided.empty()) {
                auto dir = one_sided == "plus" ? sampdist::Direction::plus : sampdist::Direction::minus;
                rep = sampdist::estimate_one_sided(samples, pred, p, dir, kind,
                                                   oc ? &*oc : nullptr);
            } else if (root) {
                rep = sampdist::estimate_lp(samples, pred, p, kind, oc ? &*oc : nullptr);
            } else {
                rep = sampdist::estimate_lpp(samples, pred, p, kind, oc ? &*oc : nullptr);
            }
            std::cout << rep.to_line() << "\n";
        } else if (*evaluate) {
            sampdist::ExperimentConfig cfg = sampdist::load_config(config_path);
            if (!csv_path.empty()) cfg.output = csv_path;
            auto rows = sampdist::evaluate(cfg);
            if (cfg.output.empty()) {
                sampdist::write_csv(rows, std::cout);
            } else {
                std::ofstream out(cfg.output);
                if (!out) throw std::runtime_error("cannot write '" + cfg.output + "'");
                sampdist::write_csv(rows, out);
                std::cerr << "wrote " << rows.size() << " rows to " << cfg.output << "\n";
            }
        } else if (*octab) {
            sampdist::OCTable t = sampdist::oc_build(oc_p, oc_res, oc_xmin);
            std::ofstream out(oc_out);
            if (!out) throw std::runtime_error("cannot write '" + oc_out + "'");
            sampdist::oc_save(t, out);
            std::cerr << "achieved ratio c = " << t.c << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
