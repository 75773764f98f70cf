#pragma once

#include <optional>
#include <string>
#include <vector>

#include "symortho/manifold.hpp"

namespace symortho {

/// Class label per term, numbered in order of first occurrence (so {0,0,1} and {1,1,0} coincide).
using SetPartition = std::vector<std::size_t>;

/// All set partitions of {0, ..., r-1} in canonical labelling.
std::vector<SetPartition> set_partitions(std::size_t r);

/**
 * One strongly orthogonal configuration: in mode j, terms in the same class
 * share a factor (up to sign), terms in different classes are orthogonal.
 */
struct SonPattern {
    std::vector<SetPartition> modes;

    std::size_t rank() const { return modes.empty() ? 0 : modes.front().size(); }
    std::string label() const;
};

/// One orthogonal configuration: pair_mode[p] is the mode where pair p (lexicographic k < l) is orthogonal.
struct OnPattern {
    std::size_t rank = 0;
    std::vector<std::size_t> pair_mode;

    std::string label() const;
};

/// Index of pair (k, l), k < l, in lexicographic order.
std::size_t pair_index(std::size_t k, std::size_t l, std::size_t rank);

/**
 * Strongly orthogonal patterns of exactly `rank` terms in which every pair is
 * orthogonal in at least one mode. Patterns equivalent under relabelling of
 * the terms (and of the modes, when `mode_symmetric`) are listed once.
 * Patterns needing more classes than a mode's dimension are skipped and their
 * labels appended to `infeasible`.
 */
std::vector<SonPattern> son_patterns(const std::vector<std::size_t>& dims, std::size_t rank,
                                     bool mode_symmetric, std::vector<std::string>* infeasible);

/// Orthogonal patterns of exactly `rank` terms, deduplicated as in son_patterns().
std::vector<OnPattern> on_patterns(const std::vector<std::size_t>& dims, std::size_t rank,
                                   bool mode_symmetric);

FrameLayout son_layout(const std::vector<std::size_t>& dims, const SonPattern& pattern);

/**
 * Layout for an orthogonal pattern. Per mode the orthogonality graph must
 * split into components that are cliques or stars; returns nullopt otherwise
 * or when a component does not fit the mode dimension.
 */
std::optional<FrameLayout> on_layout(const std::vector<std::size_t>& dims, const OnPattern& pattern);

/// Each mode's factors are the columns of one frame; with `symmetric` one frame serves all modes.
FrameLayout con_layout(const std::vector<std::size_t>& dims, std::size_t rank, bool symmetric);

/**
 * Frames in the orthogonal modes, free unit vectors elsewhere. With `structured`,
 * every term uses one factor on all orthogonal modes and one factor on all other
 * modes.
 */
FrameLayout pcon_layout(const std::vector<std::size_t>& dims, std::size_t rank,
                        const std::vector<std::size_t>& modes, bool structured);

/**
 * Layouts whose terms live in mutually orthogonal subspaces of a cubical
 * space, one per way of sharing min(n, r*d) frame columns among the terms.
 * With `symmetric`, a single layout of symmetric terms.
 */
std::vector<FrameLayout> cross_layouts(const std::vector<std::size_t>& dims, std::size_t rank,
                                       bool symmetric);

/// Unit spheres per (term, mode): the unconstrained search space.
FrameLayout free_layout(const std::vector<std::size_t>& dims, std::size_t rank);

/**
 * A point of `layout` reproducing `factors` where possible: columns read by
 * plain sources take the given vectors (first writer wins), remaining columns
 * are random, each block is orthonormalized column by column, and coefficient
 * blocks take the normalized projection of their target factor.
 */
FramePoint point_from_factors(const FrameLayout& layout, const FactorLists& factors,
                              std::mt19937_64& rng);

} // namespace symortho
