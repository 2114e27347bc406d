#pragma once

// Command-line front end. run() parses arguments, executes one command and
// returns the process exit status.

#include "nqa/dispatcher.hpp"
#include "nqa/errors.hpp"
#include "nqa/generators.hpp"
#include "nqa/nested.hpp"
#include "nqa/nondet_oracle.hpp"
#include "nqa/text_format.hpp"
#include "nqa/value_functions.hpp"
#include "nqa/word.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

namespace nqa::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kUnsupported = 3,
    kParse = 4,
    kTimeout = 5,
};

struct Query {
    std::string input;
    std::string f = "Sup";
    std::string g = "Max";
    std::optional<std::string> lambda;
    std::optional<std::string> bound;
    std::optional<std::size_t> cap;
    bool no_silent_scc_opt = false;
    bool stats = false;
    bool witness = false;
    std::optional<double> timeout;

    // eval / monitor
    std::string stem;
    std::string loop;
    std::string word;
    std::optional<std::string> aggregate;
    std::size_t budget = kDefaultOracleCap;

    // gen / bench
    std::string family;
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t nmax = 4;
    std::size_t kmax = 4;
    std::optional<std::string> out;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline Weight parse_weight_arg(const std::string& what, const std::string& text) {
    try {
        return Weight::parse(text);
    } catch (const std::invalid_argument& e) {
        throw UsageError(what + ": " + e.what());
    }
}

inline InfiniteValueFn parse_f(const Query& q) {
    try {
        return parse_infinite_value_fn(q.f);
    } catch (const InvalidInput& e) {
        throw UsageError(e.what());
    }
}

inline FiniteValueFn parse_g(const Query& q) {
    FiniteValueFn::Kind kind;
    try {
        kind = parse_finite_kind(q.g);
    } catch (const InvalidInput& e) {
        throw UsageError(e.what());
    }
    if (kind == FiniteValueFn::Kind::SumB) {
        if (!q.bound) throw UsageError("--bound is required with --g SumB");
        return FiniteValueFn::sum_bounded(parse_weight_arg("--bound", *q.bound));
    }
    if (q.bound) throw UsageError("--bound is only allowed with --g SumB");
    return make_finite_value_fn(kind, std::nullopt);
}

inline Weight require_lambda(const Query& q) {
    if (!q.lambda) throw UsageError("--lambda is required");
    return parse_weight_arg("--lambda", *q.lambda);
}

struct Budget {
    std::optional<Cancellation> cancel;
    explicit Budget(const std::optional<double>& seconds) {
        if (seconds) {
            if (*seconds <= 0) throw UsageError("--timeout must be positive");
            cancel.emplace(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                std::chrono::duration<double>(*seconds)));
        }
    }
    Cancellation* get() { return cancel ? &*cancel : nullptr; }
};

inline QueryOptions query_options(const Query& q, Cancellation* cancel) {
    QueryOptions o;
    o.scc_optimization = !q.no_silent_scc_opt;
    o.multiplicity_cap = q.cap;
    o.cancel = cancel;
    return o;
}

inline void print_lasso(std::ostream& out, const Alphabet& sigma, const Lasso& l) {
    out << "stem: " << format_letters(sigma, l.stem) << "\n";
    out << "loop: " << format_letters(sigma, l.loop) << "\n";
}

inline void print_stats(std::ostream& out, const PipelineStats& s) {
    out << "route: " << to_string(s.route) << "\n";
    out << "flattened states: " << s.flat_states << "\n";
    out << "flattened transitions: " << s.flat_transitions << "\n";
    out << "qa states: " << s.qa_states << "\n";
    out << "qa transitions: " << s.qa_transitions << "\n";
    if (s.unbounded) out << "unbounded child sums: " << (*s.unbounded ? "yes" : "no") << "\n";
    if (s.multiplicity_cap) out << "multiplicity bound: " << *s.multiplicity_cap << "\n";
    for (const auto& [phase, seconds] : s.phases)
        out << "time " << phase << ": " << std::fixed << std::setprecision(6) << seconds << "s\n";
    out.unsetf(std::ios::floatfield);
}

inline int cmd_empty(const Query& q, std::ostream& out) {
    auto n = parse_nqa(read_file(q.input));
    auto f = parse_f(q);
    auto g = parse_g(q);
    auto lambda = require_lambda(q);
    Budget budget(q.timeout);
    auto r = nqa_emptiness(n, f, g, lambda, query_options(q, budget.get()));
    out << (r.nonempty ? "NONEMPTY" : "EMPTY") << "\n";
    if (q.witness && r.witness) print_lasso(out, n.alphabet(), *r.witness);
    if (q.witness && r.nonempty && !r.witness) out << "witness: none (value reached only in the limit)\n";
    if (q.stats) print_stats(out, r.stats);
    return kOk;
}

inline int cmd_universal(const Query& q, std::ostream& out) {
    auto n = parse_nqa(read_file(q.input));
    auto f = parse_f(q);
    auto g = parse_g(q);
    auto lambda = require_lambda(q);
    Budget budget(q.timeout);
    auto r = nqa_universality(n, f, g, lambda, query_options(q, budget.get()));
    out << (r.universal ? "UNIVERSAL" : "NOT-UNIVERSAL") << "\n";
    if (q.witness && r.counterexample) print_lasso(out, n.alphabet(), *r.counterexample);
    if (q.stats) print_stats(out, r.stats);
    return kOk;
}

inline int cmd_flatten(const Query& q, std::ostream& out) {
    auto n = parse_nqa(read_file(q.input));
    auto f = parse_f(q);
    auto g = parse_g(q);
    std::optional<Weight> lambda;
    if (q.lambda) lambda = parse_weight_arg("--lambda", *q.lambda);
    Budget budget(q.timeout);
    auto flat = nqa_flatten(n, f, g, lambda, query_options(q, budget.get()));
    std::string text = serialize_silent_qa(flat);
    if (q.out) {
        std::ofstream file(*q.out);
        if (!file) throw UsageError("cannot write '" + *q.out + "'");
        file << text;
    } else {
        out << text;
    }
    if (q.stats) out << "flattened states: " << flat.num_states() << "\nflattened transitions: " << flat.num_transitions() << "\n";
    return kOk;
}

inline int cmd_eval(const Query& q, std::ostream& out) {
    auto n = parse_nqa(read_file(q.input));
    auto f = parse_f(q);
    auto g = parse_g(q);
    Lasso l;
    try {
        l = parse_lasso(n.alphabet(), q.stem, q.loop);
    } catch (const InvalidInput& e) {
        throw UsageError(e.what());
    }
    Budget budget(q.timeout);
    if (is_deterministic(n)) {
        out << "value: " << nqa_eval_lasso(n, f, g, l, q.budget).str() << "\n";
        return kOk;
    }
    auto r = nqa_eval_lasso_nondet(n, f, g, l, q.budget, budget.get());
    out << "value: " << r.value.str() << "\n";
    if (r.exhausted) out << "budget exhausted: value is a lower bound\n";
    return kOk;
}

inline int cmd_monitor(const Query& q, std::ostream& out) {
    auto n = parse_nqa(read_file(q.input));
    auto g = parse_g(q);
    std::vector<Letter> word;
    try {
        word = parse_letters(n.alphabet(), q.word);
    } catch (const InvalidInput& e) {
        throw UsageError(e.what());
    }
    auto r = monitor_prefix(n, g, word);
    out << "returned:";
    for (const auto& v : r.returned) out << " " << v.spawn_position << ":" << v.value.str();
    out << "\nactive: " << r.still_active << "\n";
    if (!r.returned.empty()) {
        InfiniteValueFn f = InfiniteValueFn::LimSupAvg;
        if (q.aggregate) {
            Query fq = q;
            fq.f = *q.aggregate;
            f = parse_f(fq);
        }
        auto values = r.values();
        out << "running " << to_string(f) << ": " << running_aggregate(f, values).str() << "\n";
    }
    for (const auto& d : r.diagnostics) out << "note: " << d << "\n";
    return kOk;
}

inline NestedAutomaton generate(const std::string& family, std::size_t n, std::size_t k) {
    try {
        if (family == "rt") return gen_response(n, k);
        if (family == "rc") return gen_resource(n, k);
    } catch (const InvalidInput& e) {
        throw UsageError(e.what());
    }
    throw UsageError("unknown family '" + family + "' (expected rt or rc)");
}

inline int cmd_gen(const Query& q, std::ostream& out) {
    auto n = generate(q.family, q.n, q.k);
    std::string text = serialize_nqa(n);
    if (q.out) {
        std::ofstream file(*q.out);
        if (!file) throw UsageError("cannot write '" + *q.out + "'");
        file << text;
        out << "wrote " << *q.out << "\n";
    } else {
        out << text;
    }
    return kOk;
}

inline int cmd_validate(const Query& q, std::ostream& out) {
    auto n = parse_nqa(read_file(q.input));
    for (const auto& d : validate_nqa(n))
        out << (d.severity == Severity::Error ? "error: " : "warning: ") << d.message << "\n";
    out << "OK\n";
    out << "parent states: " << n.parent.num_states() << "\n";
    out << "children: " << n.num_children() << "\n";
    for (std::size_t j = 0; j < n.num_children(); ++j)
        out << "child " << j + 1 << " states: " << n.children[j].num_states() << "\n";
    out << "alphabet: " << n.alphabet().size() << "\n";
    out << "deterministic: " << (is_deterministic(n) ? "yes" : "no") << "\n";
    return kOk;
}

/// CSV sweep over a benchmark family. The default query asks whether value k is
/// reachable: (Sup, Sum+) for rt and (Sup, Max) for rc.
inline int cmd_bench(const Query& q, std::ostream& out) {
    if (q.family != "rt" && q.family != "rc") throw UsageError("unknown family '" + q.family + "' (expected rt or rc)");
    const bool rt = q.family == "rt";
    auto f = parse_f(q);
    Query gq = q;
    if (gq.g == "Max" && rt) gq.g = "Sum+";
    auto g = parse_g(gq);
    const double per_instance = q.timeout.value_or(300.0);
    out << "n,k,verdict,states,transitions,seconds\n";
    for (std::size_t n = 1; n <= q.nmax; ++n)
        for (std::size_t k = rt ? n : 1; k <= q.kmax; ++k) {
            auto nqa = generate(q.family, n, k);
            Weight lambda = q.lambda ? parse_weight_arg("--lambda", *q.lambda) : Weight(static_cast<std::int64_t>(k));
            Budget budget(per_instance);
            auto start = std::chrono::steady_clock::now();
            std::string verdict;
            PipelineStats stats;
            try {
                auto r = nqa_emptiness(nqa, f, g, lambda, query_options(q, budget.get()));
                verdict = r.nonempty ? "NONEMPTY" : "EMPTY";
                stats = r.stats;
            } catch (const Timeout&) {
                verdict = "TIMEOUT";
            }
            double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            out << n << "," << k << "," << verdict << "," << stats.flat_states << "," << stats.flat_transitions << ","
                << std::fixed << std::setprecision(3) << seconds << "\n";
            out.unsetf(std::ios::floatfield);
        }
    return kOk;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Threshold problems for nested quantitative automata", "nqa"};
    app.require_subcommand(1);
    Query q;

    auto query_flags = [&](CLI::App* s, bool needs_lambda) {
        s->add_option("--f", q.f, "parent value function: Inf Sup LimInf LimSup LimInfAvg LimSupAvg");
        s->add_option("--g", q.g, "child value function: Min Max Sum+ Sum- SumB");
        auto* l = s->add_option("--lambda", q.lambda, "threshold");
        if (needs_lambda) l->required();
        s->add_option("--bound", q.bound, "bound B of SumB");
        s->add_option("--cap", q.cap, "multiplicity bound of the multiset flattening");
        s->add_flag("--no-silent-scc-opt", q.no_silent_scc_opt, "compress silent segments everywhere");
        s->add_flag("--stats", q.stats, "print state counts and phase times");
        s->add_flag("--witness", q.witness, "print a witness lasso");
        s->add_option("--timeout", q.timeout, "time limit in seconds");
        s->add_option("input", q.input, "NQA file")->required();
    };
    auto* empty = app.add_subcommand("empty", "is some word's value at least lambda?");
    query_flags(empty, true);
    auto* universal = app.add_subcommand("universal", "is every word's value at least lambda?");
    query_flags(universal, true);
    auto* flatten = app.add_subcommand("flatten", "print the flattened automaton of the emptiness route");
    query_flags(flatten, false);
    flatten->add_option("--out", q.out, "output file");

    auto* eval = app.add_subcommand("eval", "value of a lasso word");
    eval->add_option("--f", q.f, "parent value function");
    eval->add_option("--g", q.g, "child value function");
    eval->add_option("--bound", q.bound, "bound B of SumB");
    eval->add_option("--stem", q.stem, "stem letters, space separated");
    eval->add_option("--loop", q.loop, "loop letters, space separated")->required();
    eval->add_option("--budget", q.budget, "configuration budget");
    eval->add_option("--timeout", q.timeout, "time limit in seconds");
    eval->add_option("input", q.input, "NQA file")->required();

    auto* monitor = app.add_subcommand("monitor", "run a deterministic NQA on a finite word");
    monitor->add_option("--g", q.g, "child value function");
    monitor->add_option("--f", q.aggregate, "running aggregate (default LimSupAvg)");
    monitor->add_option("--bound", q.bound, "bound B of SumB");
    monitor->add_option("--word", q.word, "letters, space separated")->required();
    monitor->add_option("input", q.input, "NQA file")->required();

    auto* gen = app.add_subcommand("gen", "generate a benchmark instance");
    gen->add_option("family", q.family, "rt or rc")->required();
    gen->add_option("n", q.n, "first parameter")->required();
    gen->add_option("k", q.k, "second parameter")->required();
    gen->add_option("--out", q.out, "output file");

    auto* validate = app.add_subcommand("validate", "check an NQA file");
    validate->add_option("input", q.input, "NQA file")->required();

    auto* bench = app.add_subcommand("bench", "CSV sweep over a benchmark family");
    bench->add_option("family", q.family, "rt or rc")->required();
    bench->add_option("--nmax", q.nmax, "largest n");
    bench->add_option("--kmax", q.kmax, "largest k");
    bench->add_option("--f", q.f, "parent value function");
    bench->add_option("--g", q.g, "child value function (Sum+ for rt, Max for rc by default)");
    bench->add_option("--bound", q.bound, "bound B of SumB");
    bench->add_option("--lambda", q.lambda, "threshold (default k)");
    bench->add_option("--cap", q.cap, "multiplicity bound");
    bench->add_option("--timeout", q.timeout, "per-instance time limit in seconds (default 300)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (*empty) return detail::cmd_empty(q, out);
        if (*universal) return detail::cmd_universal(q, out);
        if (*flatten) return detail::cmd_flatten(q, out);
        if (*eval) return detail::cmd_eval(q, out);
        if (*monitor) return detail::cmd_monitor(q, out);
        if (*gen) return detail::cmd_gen(q, out);
        if (*validate) return detail::cmd_validate(q, out);
        if (*bench) return detail::cmd_bench(q, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kParse;
    } catch (const UnsupportedError& e) {
        out << "UNSUPPORTED-OPEN\n";
        err << e.what() << "\n";
        return kUnsupported;
    } catch (const UndecidableError& e) {
        out << "UNDECIDABLE\n";
        err << e.what() << "\n";
        return kUnsupported;
    } catch (const Timeout&) {
        out << "TIMEOUT\n";
        return kTimeout;
    } catch (const InvalidInput& e) {
        err << "invalid input: " << e.what() << "\n";
        return kUsage;
    } catch (const CapacityError& e) {
        err << "capacity exceeded: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}

}  // namespace nqa::cli
