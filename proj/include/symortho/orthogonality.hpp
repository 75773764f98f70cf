#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "symortho/tensor.hpp"

namespace symortho {

enum class NotionKind { ON, SON, CON, PCON };

/**
 * Orthogonality notion for rank-one terms.
 *
 * ON: product of per-mode inner products vanishes. SON: ON, and every mode is
 * either orthogonal or parallel up to phase. CON: every mode orthogonal.
 * PCON: every mode in `modes` orthogonal. Modes are 0-based; a single mode
 * is what the literature calls semiorthogonality.
 */
struct Notion {
    NotionKind kind = NotionKind::CON;
    std::vector<std::size_t> modes;

    static Notion on() { return {NotionKind::ON, {}}; }
    static Notion son() { return {NotionKind::SON, {}}; }
    static Notion con() { return {NotionKind::CON, {}}; }
    /// Sorts and deduplicates the modes; throws ArgumentError when none are given.
    static Notion pcon(std::vector<std::size_t> modes);

    /// Throws ArgumentError unless modes are given exactly for PCON and fit the order.
    void validate(std::size_t order) const;

    bool operator==(const Notion&) const = default;
};

std::string to_string(const Notion& notion);
/// Parses "on" | "son" | "con" | "pcon" (case-insensitive); PCON takes `modes`.
Notion parse_notion(std::string_view name, std::vector<std::size_t> modes = {});

inline constexpr double kOrthogonalityTol = 1e-10;

struct PairCertificate {
    std::size_t first = 0;
    std::size_t second = 0;
    /// <x_j, y_j> for every mode j.
    std::vector<Complex> mode_inner;
    bool on = false;
    bool son = false;
    bool con = false;
    /// Present when the requested notion is PCON.
    std::optional<bool> pcon;
    /// Verdict for the requested notion.
    bool holds = false;
    double tol = kOrthogonalityTol;
};

struct DecompositionCertificate {
    Notion notion;
    double tol = kOrthogonalityTol;
    std::vector<PairCertificate> pairs;
    bool valid = true;
};

template <typename S>
PairCertificate pair_check(const BasicRankOneTerm<S>& x, const BasicRankOneTerm<S>& y,
                           const Notion& notion, double tol = kOrthogonalityTol);

/// Checks all r(r-1)/2 pairs; the overall verdict is their conjunction.
template <typename S>
DecompositionCertificate decomposition_check(const BasicDecomposition<S>& decomposition,
                                             const Notion& notion, double tol = kOrthogonalityTol);

/// True iff <v_kj, v_k'j'> vanishes for all k != k' and all mode pairs (j, j').
template <typename S>
bool cross_orthogonality_check(const BasicDecomposition<S>& decomposition,
                               double tol = kOrthogonalityTol);

} // namespace symortho
