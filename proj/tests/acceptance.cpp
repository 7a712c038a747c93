#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <vector>

#include "neulab/experiments.hpp"

// ============================================================================
// Acceptance gate: thirteen numbered criteria, each scored from the metric
// rows of the experiment(s) it maps onto.  Usage:
//
//   acceptance            # run every criterion
//   acceptance A7         # run one criterion
//
// Prints one PASS/FAIL line per criterion; exit 0 iff all requested criteria
// pass.  The criteria are evaluated from the same reports the `lab` CLI
// writes, so a criterion here and the corresponding experiment rows always
// agree.
// ============================================================================

namespace {

struct RowRef {
    const char* experiment;
    const char* row;
};

struct Criterion {
    const char* id;
    const char* summary;
    std::vector<RowRef> rows;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list = {
        {"A1",
         "semigroup/Q/Riesz agree with the classical operators on even extensions",
         {{"reflection-identities", "semigroup-reflection-max"},
          {"reflection-identities", "q-reflection-max"},
          {"reflection-identities", "riesz-reflection-rel-l2"}}},
        {"A2",
         "maximal H1 norm equals the half-sum of the even-extension norms",
         {{"norm-equivalence", "half-identity-max-rel"}}},
        {"A3",
         "area-function pointwise identity and sandwich bounds at every sample",
         {{"norm-equivalence", "area-pointwise-identity-max-rel"},
          {"norm-equivalence", "area-sandwich-upper-max-excess"},
          {"norm-equivalence", "area-sandwich-lower-max-excess"}}},
        {"A4",
         "half-space heat kernel obeys the doubled Gaussian upper bound",
         {{"kernel-identities", "gaussian-bound-max-excess"}}},
        {"A5",
         "kernel gradient matches finite differences and its fitted envelope",
         {{"kernel-identities", "gradient-fd-max-rel"},
          {"kernel-identities", "gradient-envelope-violations"}}},
        {"A6",
         "Riesz kernel equals the normalized time integral of the heat gradient",
         {{"kernel-identities", "riesz-time-integral-max-rel"},
          {"kernel-identities", "riesz-1d-closed-form-max-rel"}}},
        {"A7",
         "step function separates the BMO flavors; square wave separates the H1 spaces",
         {{"bmo-inclusion", "step-bmo-neumann"},
          {"bmo-inclusion", "step-bmo-classical"},
          {"counterexample", "classical-h1-change-16-32"},
          {"counterexample", "neumann-log-slope-stability"},
          {"counterexample", "neumann-log-slope-positive"}}},
        {"A8",
         "two-bump H1 norm grows like log of the separation",
         {{"two-bump", "two-bump-ratio-stability"}}},
        {"A9",
         "Riesz mass at separation M decays like M^{-n} with the right constant",
         {{"riesz-mass", "riesz-mass-slope-gap"},
          {"riesz-mass", "riesz-mass-value-at-largest-M"},
          {"riesz-mass", "riesz-mass-min-value"}}},
        {"A10",
         "single-atom factorization: epsilon budget, exact cancellation, envelope, cost",
         {{"factorize-atom", "factor-residual-epsilon-budget"},
          {"factorize-atom", "factor-residual-mean"},
          {"factorize-atom", "factor-envelope-outside-support"},
          {"factorize-atom", "factor-pair-cost-over-Mn"}}},
        {"A11",
         "iterated weak factorization contracts geometrically and reconstructs",
         {{"weak-factorize", "weak-factorize-max-ratio"},
          {"weak-factorize", "weak-factorize-reconstruction-l2"}}},
        {"A12",
         "duality pairing is exact and the commutator norm is controlled by bmo",
         {{"duality-pairing", "duality-max-normalized-gap"},
          {"commutator-bound", "commutator-step-both-sides"},
          {"commutator-bound", "commutator-constant-stability"}}},
        {"A13",
         "Riesz-synthesized functions land in the semigroup BMO ball",
         {{"fs-synthesis", "fs-synthesis-max-bmo"}}},
    };
    return list;
}

} // namespace

int main(int argc, char** argv) {
    const std::string only = argc > 1 ? argv[1] : "";
    std::map<std::string, neulab::ExperimentReport> cache;
    const auto report_for = [&](const std::string& name) -> const neulab::ExperimentReport& {
        auto it = cache.find(name);
        if (it == cache.end()) {
            neulab::ExperimentConfig cfg;
            cfg.experiment = name;
            cfg.out_dir = "acceptance-out";
            it = cache.emplace(name, neulab::run_experiment(cfg)).first;
        }
        return it->second;
    };

    bool all_ok = true, matched = false;
    try {
        for (const auto& c : criteria()) {
            if (!only.empty() && only != c.id) continue;
            matched = true;
            bool ok = true;
            std::string detail;
            for (const RowRef& ref : c.rows) {
                const neulab::ExperimentReport& rep = report_for(ref.experiment);
                const neulab::MetricRow* row = nullptr;
                for (const auto& r : rep.rows)
                    if (r.name == ref.row) row = &r;
                if (!row) {
                    ok = false;
                    detail += std::string("  [missing row ") + ref.row + "]";
                    continue;
                }
                if (!row->pass) ok = false;
                detail += std::string("\n    ") + (row->pass ? "ok   " : "FAIL ") + row->name +
                          " = " + neulab::io::format_double(row->value) + " (want " +
                          neulab::cmp_text(row->cmp) + " " +
                          neulab::io::format_double(row->tolerance) + ")";
            }
            std::printf("%s %s - %s%s\n", c.id, ok ? "PASS" : "FAIL", c.summary,
                        detail.c_str());
            std::fflush(stdout);
            all_ok = all_ok && ok;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    if (!matched) {
        std::fprintf(stderr, "unknown criterion '%s' (expected A1..A13)\n", only.c_str());
        return 2;
    }
    return all_ok ? 0 : 1;
}
