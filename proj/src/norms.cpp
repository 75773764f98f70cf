#include "symortho/norms.hpp"

#include <algorithm>
#include <cmath>

namespace symortho {

namespace {

std::size_t min_dim(const std::vector<std::size_t>& dims) {
    return *std::min_element(dims.begin(), dims.end());
}

} // namespace

SpectralNorm spectral_norm(const Tensor& tensor, const SolverConfig& config,
                           const NormOptions& options) {
    const NormEntry entry = a_norm(tensor, Notion::con(), 1, config, options);
    SpectralNorm out;
    out.value = entry.value;
    out.certified = entry.certified;
    if (!entry.optimizer.terms.empty()) {
        out.term = entry.optimizer.terms.front();
    }
    return out;
}

NormEntry a_norm(const Tensor& tensor, const Notion& notion, std::size_t rank,
                 const SolverConfig& config, const NormOptions& options) {
    ApproxProblem problem{tensor, notion, rank, false, false, config};
    const ApproxResult result = solve(problem);
    NormEntry out;
    out.notion = notion;
    out.rank = rank;
    out.optimizer = result.decomposition;
    double best = result.objective;
    if (options.certify && oracle_supports(problem)) {
        const OracleReport report = grid_oracle(problem, options.oracle);
        best = std::max(best, report.lo);
        out.certified = report.certified;
        out.upper = std::sqrt(std::max(report.hi, 0.0));
    }
    out.value = std::sqrt(std::max(best, 0.0));
    if (frobenius_norm(tensor) == 0.0) {
        out.certified = true;
    }
    return out;
}

ChainReport chain_check(const Tensor& tensor, std::size_t r_max, const SolverConfig& config,
                        const NormOptions& options, double slack) {
    if (r_max == 0) {
        throw ArgumentError("chain check needs r_max >= 1");
    }
    ChainReport out;
    const double norm = frobenius_norm(tensor);
    out.slack = slack * std::max(1.0, norm);
    out.norms.frobenius = norm;
    out.norms.spectral = spectral_norm(tensor, config, options);

    auto check = [&](std::string relation, double lhs, double rhs) {
        if (lhs > rhs + out.slack) {
            out.violations.push_back({std::move(relation), lhs, rhs});
        }
    };

    const std::vector<Notion> notions{Notion::con(), Notion::son(), Notion::on()};
    // values[notion][r - 1], absent when the class is skipped.
    std::vector<std::vector<std::optional<double>>> values(notions.size());
    for (std::size_t n = 0; n < notions.size(); ++n) {
        for (std::size_t r = 1; r <= r_max; ++r) {
            const std::string name = to_string(notions[n]) + "_" + std::to_string(r);
            if (notions[n].kind == NotionKind::CON && r > min_dim(tensor.dims())) {
                out.skipped.push_back(name);
                values[n].push_back(std::nullopt);
                continue;
            }
            NormEntry entry = a_norm(tensor, notions[n], r, config, options);
            values[n].push_back(entry.value);
            out.norms.entries.push_back(std::move(entry));
        }
    }

    const double spectral = out.norms.spectral.value;
    for (std::size_t n = 0; n < notions.size(); ++n) {
        const std::string name = to_string(notions[n]);
        const double a1 = *values[n][0];
        check("spectral <= " + name + "_1", spectral, a1);
        check(name + "_1 <= spectral", a1, spectral);
        std::optional<double> previous;
        for (std::size_t r = 1; r <= r_max; ++r) {
            const auto& v = values[n][r - 1];
            if (!v) {
                continue;
            }
            if (previous) {
                check(name + "_" + std::to_string(r - 1) + " <= " + name + "_" + std::to_string(r),
                      *previous, *v);
            }
            check(name + "_" + std::to_string(r) + " <= frobenius", *v, norm);
            previous = v;
        }
    }
    for (std::size_t r = 1; r <= r_max; ++r) {
        const std::string suffix = "_" + std::to_string(r);
        if (values[0][r - 1]) {
            check("CON" + suffix + " <= SON" + suffix, *values[0][r - 1], *values[1][r - 1]);
        }
        check("SON" + suffix + " <= ON" + suffix, *values[1][r - 1], *values[2][r - 1]);
    }
    out.holds = out.violations.empty();
    return out;
}

} // namespace symortho
