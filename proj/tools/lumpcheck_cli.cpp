// lumpcheck: abstraction and PCTL checking of labelled Markov chains.

#include "lumpcheck/lumpcheck.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace lumpcheck;

constexpr int kExitOk = 0;
constexpr int kExitViolated = 1;
constexpr int kExitInputError = 2;

struct Options {
    std::string model;
    std::string output;
    bool quiet = false;
    // abstract
    std::string method = "imdp";
    std::string representatives;
    // check
    std::string formula;
    std::string state;
    std::string model_kind = "lmc";
    bool assert_verdict = false;
    // compare
    std::string formula_template;
    std::string k_range;
};

class Logger {
  public:
    explicit Logger(bool quiet) : quiet_(quiet) {}
    void operator()(const std::string& line) const {
        if (!quiet_) std::cerr << "lumpcheck: " << line << '\n';
    }

  private:
    bool quiet_;
};

void emit(const Options& opt, const std::string& text) {
    if (opt.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(opt.output);
    if (!out) throw InvalidModel("cannot write '" + opt.output + "'");
    out << text;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

int run_validate(const Options& opt, const Logger& log) {
    const auto chain = io::load_model(opt.model);
    const auto partition = partition_by_labels(chain);
    log("model is valid");
    std::cout << "states: " << chain.size() << "\nblocks: " << partition.size() << '\n';
    for (std::size_t b = 0; b < partition.size(); ++b) {
        std::cout << "  " << partition.block_name(b) << ":";
        for (State s : partition.block(b)) std::cout << ' ' << chain.id(s);
        std::cout << '\n';
    }
    return kExitOk;
}

int run_abstract(const Options& opt, const Logger& log) {
    const auto chain = io::load_model(opt.model);
    const auto partition = partition_by_labels(chain);
    io::json out;
    if (opt.method == "standard") {
        std::optional<std::vector<State>> reps;
        if (!opt.representatives.empty()) {
            std::vector<State> chosen;
            for (const auto& id : split_commas(opt.representatives)) chosen.push_back(chain.index_of(id));
            // Accept representatives in any order: place each in its block's slot.
            std::vector<State> ordered(partition.size(), chain.size());
            for (State s : chosen) {
                auto& slot = ordered[partition.block_of(s)];
                if (slot != chain.size())
                    throw InvalidRepresentative("two representatives for block " +
                                                partition.block_name(partition.block_of(s)));
                slot = s;
            }
            for (std::size_t b = 0; b < ordered.size(); ++b)
                if (ordered[b] == chain.size())
                    throw InvalidRepresentative("no representative for block " + partition.block_name(b));
            reps = std::move(ordered);
        }
        const auto lumped = build_standard_abstraction(chain, partition, reps);
        log("standard abstraction: epsilon = " + io::format_number(lumped.epsilon));
        out = io::lumped_json(lumped, chain);
    } else if (opt.method == "imdp") {
        const auto imdpa = build_imdpa(chain, partition);
        out = io::imdpa_json(imdpa);
        log("IMDP abstraction built for " + std::to_string(imdpa.blocks.size()) + " blocks");
    } else {
        const auto mdpa = imdpa_to_mdpa(build_imdpa(chain, partition));
        out = io::mdpa_json(mdpa);
        log("MDP abstraction built for " + std::to_string(mdpa.size()) + " blocks");
    }
    emit(opt, out.dump(2) + "\n");
    return kExitOk;
}

/// An MDPA file, an IMDPA file, or a concrete model that is abstracted on the fly.
Mdpa load_mdpa(const std::string& path, const Logger& log) {
    const auto j = io::read_json_file(path);
    if (j.contains("actions")) return io::mdpa_from_json(j);
    if (j.contains("interval_rows")) return imdpa_to_mdpa(io::imdpa_from_json(j));
    const auto chain = io::model_from_json(j);
    log("abstracting concrete model by its labels");
    return imdpa_to_mdpa(build_imdpa(chain, partition_by_labels(chain)));
}

int report(const Options& opt, const CheckResult& result, const std::vector<std::string>& names,
           std::size_t selected, bool has_selection, const Logger& log) {
    for (const auto& w : result.warnings) log("warning: " + w);
    if (result.error_bound) log("eps_k = " + io::format_number(result.error_bound->eps));

    auto value_text = [&](std::size_t s) {
        std::string text = io::format_number((*result.values)[s]);
        if (result.upper_values) text += " " + io::format_number((*result.upper_values)[s]);
        return text;
    };
    const bool query = result.sat.empty();
    auto line = [&](std::size_t s) { return query ? value_text(s) : std::string(result.sat[s] ? "true" : "false"); };

    std::ostringstream out;
    if (has_selection) {
        out << line(selected) << '\n';
    } else {
        for (std::size_t s = 0; s < names.size(); ++s) out << names[s] << ' ' << line(s) << '\n';
    }
    emit(opt, out.str());

    if (opt.assert_verdict) {
        if (query) throw UnsupportedFormula("--assert needs a thresholded formula, not a query");
        if (!result.sat[selected]) {
            log("property violated at " + names[selected]);
            return kExitViolated;
        }
    }
    return kExitOk;
}

int run_check(const Options& opt, const Logger& log) {
    const auto formula = pctl::parse_formula(opt.formula);
    if (opt.model_kind == "lmc") {
        const auto chain = io::load_model(opt.model);
        const auto result = check_lmc(chain, formula);
        const bool has = !opt.state.empty();
        const std::size_t s = has ? chain.index_of(opt.state) : chain.initial_state();
        return report(opt, result, chain.ids(), s, has, log);
    }
    const auto mdpa = load_mdpa(opt.model, log);
    const auto result = check_imdpa(mdpa, formula);
    const bool has = !opt.state.empty();
    std::size_t b = mdpa.blocks.initial;
    if (has) {
        bool found = false;
        for (std::size_t i = 0; i < mdpa.blocks.size() && !found; ++i) {
            if (mdpa.blocks.names[i] == opt.state) {
                b = i;
                found = true;
            }
            for (const auto& member : mdpa.blocks.members[i])
                if (!found && member == opt.state) {
                    b = i;
                    found = true;
                }
        }
        if (!found) throw UnknownState(opt.state);
    }
    return report(opt, result, mdpa.blocks.names, b, has, log);
}

std::pair<pctl::Bound, pctl::Bound> parse_range(const std::string& text) {
    const auto dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            const auto k = std::stoul(text);
            return {k, k};
        }
        return {std::stoul(text.substr(0, dots)), std::stoul(text.substr(dots + 2))};
    } catch (const std::exception&) {
        throw InvalidModel("--k expects a range a..b, got '" + text + "'");
    }
}

int run_compare(const Options& opt, const Logger& log) {
    const auto chain = io::load_model(opt.model);
    const auto partition = partition_by_labels(chain);
    const auto [first, last] = parse_range(opt.k_range);
    if (first > last) throw InvalidModel("empty --k range");
    if (opt.formula_template.find('K') == std::string::npos)
        throw InvalidModel("--formula-template must contain the placeholder K");

    auto path_at = [&](pctl::Bound k) {
        std::string text = opt.formula_template;
        for (auto pos = text.find('K'); pos != std::string::npos; pos = text.find('K', pos))
            text.replace(pos, 1, std::to_string(k));
        const auto f = pctl::parse_formula("P=? [ " + text + " ]");
        return std::get<pctl::ProbQuery>(f->node).path;
    };
    path_at(first); // surface syntax errors before any work

    const auto table = compare_abstractions(chain, partition, path_at, first, last);
    log("standard epsilon = " + io::format_number(table.std_epsilon) +
        ", max xi = " + io::format_number(*std::max_element(table.xi.begin(), table.xi.end())));
    std::ostringstream out;
    io::write_csv(out, table);
    emit(opt, out.str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Abstraction and PCTL model checking of labelled Markov chains"};
    app.require_subcommand(1);
    Options opt;
    app.add_flag("--quiet,-q", opt.quiet, "Suppress log messages");

    auto* validate = app.add_subcommand("validate", "Validate a model file and list its label partition");
    validate->add_option("model", opt.model, "Model JSON file")->required();

    auto* abstract = app.add_subcommand("abstract", "Build an abstraction of the model");
    abstract->add_option("model", opt.model, "Model JSON file")->required();
    abstract->add_option("--method", opt.method, "standard | imdp | mdpa")
        ->check(CLI::IsMember({"standard", "imdp", "mdpa"}));
    abstract->add_option("--representatives", opt.representatives, "Comma-separated representatives (standard)");
    abstract->add_option("-o,--output", opt.output, "Output file (default: stdout)");

    auto* check = app.add_subcommand("check", "Check a PCTL formula");
    check->add_option("model", opt.model, "Model, IMDPA or MDPA JSON file")->required();
    check->add_option("--formula", opt.formula, "PCTL formula")->required();
    check->add_option("--state", opt.state, "Report only this state (or block)");
    check->add_option("--model-kind", opt.model_kind, "lmc | mdpa")->check(CLI::IsMember({"lmc", "mdpa"}));
    check->add_flag("--assert", opt.assert_verdict, "Exit with status 1 when the formula does not hold");
    check->add_option("-o,--output", opt.output, "Output file (default: stdout)");

    auto* compare = app.add_subcommand("compare", "Compare concrete, standard and interval abstractions");
    compare->add_option("model", opt.model, "Model JSON file")->required();
    compare->add_option("--formula-template", opt.formula_template, "Path formula with placeholder K")->required();
    compare->add_option("--k", opt.k_range, "Range a..b of K values")->required();
    compare->add_option("-o,--output", opt.output, "CSV output file (default: stdout)");

    for (auto* sub : {validate, abstract, check, compare})
        sub->add_flag("--quiet,-q", opt.quiet, "Suppress log messages");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;
    }

    const Logger log(opt.quiet);
    try {
        if (*validate) return run_validate(opt, log);
        if (*abstract) return run_abstract(opt, log);
        if (*check) return run_check(opt, log);
        return run_compare(opt, log);
    } catch (const Error& e) {
        std::cerr << "lumpcheck: error: " << e.what() << '\n';
        return kExitInputError;
    }
}
