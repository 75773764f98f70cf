#include "symortho/layouts.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

namespace symortho {

namespace {

SetPartition relabel(const SetPartition& labels) {
    SetPartition out(labels.size());
    std::vector<std::size_t> seen;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto it = std::find(seen.begin(), seen.end(), labels[i]);
        if (it == seen.end()) {
            seen.push_back(labels[i]);
            out[i] = seen.size() - 1;
        } else {
            out[i] = static_cast<std::size_t>(it - seen.begin());
        }
    }
    return out;
}

std::size_t class_count(const SetPartition& p) {
    return p.empty() ? 0 : *std::max_element(p.begin(), p.end()) + 1;
}

std::vector<std::vector<std::size_t>> permutations(std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<std::size_t>> out;
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

std::string partition_string(const SetPartition& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        s += (i ? "," : "") + std::to_string(p[i]);
    }
    return s;
}

bool cubical(const std::vector<std::size_t>& dims) {
    return std::all_of(dims.begin(), dims.end(), [&](std::size_t n) { return n == dims.front(); });
}

FrameBlock sphere(std::size_t n) { return {n, 1}; }

} // namespace

std::size_t pair_index(std::size_t k, std::size_t l, std::size_t rank) {
    // Pairs (0,1), (0,2), ..., (0,r-1), (1,2), ...
    return k * rank - k * (k + 1) / 2 + (l - k - 1);
}

std::vector<SetPartition> set_partitions(std::size_t r) {
    std::vector<SetPartition> out;
    SetPartition current(r, 0);
    std::function<void(std::size_t, std::size_t)> grow = [&](std::size_t i, std::size_t used) {
        if (i == r) {
            out.push_back(current);
            return;
        }
        for (std::size_t c = 0; c <= used && c < r; ++c) {
            current[i] = c;
            grow(i + 1, std::max(used, c + 1));
        }
    };
    if (r == 0) {
        return {SetPartition{}};
    }
    current[0] = 0;
    grow(1, 1);
    return out;
}

std::string SonPattern::label() const {
    std::string s = "son[";
    for (std::size_t j = 0; j < modes.size(); ++j) {
        s += (j ? "|" : "") + partition_string(modes[j]);
    }
    return s + "]";
}

std::string OnPattern::label() const {
    std::string s = "on[";
    std::size_t p = 0;
    for (std::size_t k = 0; k < rank; ++k) {
        for (std::size_t l = k + 1; l < rank; ++l, ++p) {
            s += (p ? "," : "") + std::to_string(k) + "-" + std::to_string(l) + "@" +
                 std::to_string(pair_mode[p] + 1);
        }
    }
    return s + "]";
}

std::vector<SonPattern> son_patterns(const std::vector<std::size_t>& dims, std::size_t rank,
                                     bool mode_symmetric, std::vector<std::string>* infeasible) {
    const std::size_t d = dims.size();
    const auto partitions = set_partitions(rank);
    std::vector<std::vector<SetPartition>> choices(d);
    for (std::size_t j = 0; j < d; ++j) {
        for (const auto& p : partitions) {
            if (class_count(p) <= dims[j]) {
                choices[j].push_back(p);
            } else if (infeasible) {
                infeasible->push_back("mode " + std::to_string(j + 1) + " classes {" +
                                      partition_string(p) + "} exceed dimension " +
                                      std::to_string(dims[j]));
            }
        }
    }
    const auto term_perms = permutations(rank);
    std::set<std::vector<SetPartition>> seen;
    std::vector<SonPattern> out;
    std::vector<std::size_t> pick(d, 0);
    if (std::any_of(choices.begin(), choices.end(), [](const auto& c) { return c.empty(); })) {
        return out;
    }
    while (true) {
        SonPattern pattern;
        for (std::size_t j = 0; j < d; ++j) {
            pattern.modes.push_back(choices[j][pick[j]]);
        }
        bool separated = true;
        for (std::size_t k = 0; k < rank && separated; ++k) {
            for (std::size_t l = k + 1; l < rank && separated; ++l) {
                separated = std::any_of(pattern.modes.begin(), pattern.modes.end(),
                                        [&](const SetPartition& p) { return p[k] != p[l]; });
            }
        }
        if (separated) {
            std::vector<SetPartition> key;
            for (const auto& perm : term_perms) {
                std::vector<SetPartition> candidate;
                for (const auto& p : pattern.modes) {
                    SetPartition moved(rank);
                    for (std::size_t k = 0; k < rank; ++k) {
                        moved[k] = p[perm[k]];
                    }
                    candidate.push_back(relabel(moved));
                }
                if (mode_symmetric) {
                    std::sort(candidate.begin(), candidate.end());
                }
                if (key.empty() || candidate < key) {
                    key = std::move(candidate);
                }
            }
            if (seen.insert(key).second) {
                out.push_back(std::move(pattern));
            }
        }
        std::size_t j = 0;
        while (j < d && ++pick[j] == choices[j].size()) {
            pick[j] = 0;
            ++j;
        }
        if (j == d) {
            break;
        }
    }
    return out;
}

std::vector<OnPattern> on_patterns(const std::vector<std::size_t>& dims, std::size_t rank,
                                   bool mode_symmetric) {
    const std::size_t d = dims.size();
    const std::size_t pairs = rank * (rank - 1) / 2;
    const auto term_perms = permutations(rank);
    const auto mode_perms = mode_symmetric ? permutations(d)
                                           : std::vector<std::vector<std::size_t>>{[&] {
                                                 std::vector<std::size_t> id(d);
                                                 std::iota(id.begin(), id.end(), 0);
                                                 return id;
                                             }()};
    std::set<std::vector<std::size_t>> seen;
    std::vector<OnPattern> out;
    std::vector<std::size_t> assign(pairs, 0);
    while (true) {
        std::vector<std::size_t> key;
        for (const auto& tp : term_perms) {
            for (const auto& mp : mode_perms) {
                std::vector<std::size_t> candidate(pairs);
                for (std::size_t k = 0; k < rank; ++k) {
                    for (std::size_t l = k + 1; l < rank; ++l) {
                        const std::size_t a = std::min(tp[k], tp[l]), b = std::max(tp[k], tp[l]);
                        candidate[pair_index(k, l, rank)] = mp[assign[pair_index(a, b, rank)]];
                    }
                }
                if (key.empty() || candidate < key) {
                    key = std::move(candidate);
                }
            }
        }
        if (seen.insert(key).second) {
            out.push_back({rank, assign});
        }
        std::size_t p = 0;
        while (p < pairs && ++assign[p] == d) {
            assign[p] = 0;
            ++p;
        }
        if (p == pairs) {
            break;
        }
    }
    return out;
}

FrameLayout son_layout(const std::vector<std::size_t>& dims, const SonPattern& pattern) {
    FrameLayout layout;
    layout.label = pattern.label();
    const std::size_t r = pattern.rank();
    layout.factors.assign(r, std::vector<FactorSource>(dims.size()));
    for (std::size_t j = 0; j < dims.size(); ++j) {
        const std::size_t block = layout.blocks.size();
        layout.blocks.push_back({dims[j], class_count(pattern.modes[j])});
        for (std::size_t k = 0; k < r; ++k) {
            layout.factors[k][j] = {block, pattern.modes[j][k], 1, std::nullopt};
        }
    }
    return layout;
}

std::optional<FrameLayout> on_layout(const std::vector<std::size_t>& dims, const OnPattern& pattern) {
    FrameLayout layout;
    layout.label = pattern.label();
    const std::size_t r = pattern.rank;
    layout.factors.assign(r, std::vector<FactorSource>(dims.size()));
    for (std::size_t j = 0; j < dims.size(); ++j) {
        const std::size_t n = dims[j];
        std::vector<std::vector<bool>> adj(r, std::vector<bool>(r, false));
        for (std::size_t k = 0; k < r; ++k) {
            for (std::size_t l = k + 1; l < r; ++l) {
                if (pattern.pair_mode[pair_index(k, l, r)] == j) {
                    adj[k][l] = adj[l][k] = true;
                }
            }
        }
        std::vector<bool> placed(r, false);
        for (std::size_t start = 0; start < r; ++start) {
            if (placed[start]) {
                continue;
            }
            std::vector<std::size_t> comp{start};
            placed[start] = true;
            for (std::size_t i = 0; i < comp.size(); ++i) {
                for (std::size_t l = 0; l < r; ++l) {
                    if (adj[comp[i]][l] && !placed[l]) {
                        placed[l] = true;
                        comp.push_back(l);
                    }
                }
            }
            std::sort(comp.begin(), comp.end());
            const std::size_t m = comp.size();
            std::size_t edges = 0;
            for (std::size_t a = 0; a < m; ++a) {
                for (std::size_t b = a + 1; b < m; ++b) {
                    edges += adj[comp[a]][comp[b]] ? 1 : 0;
                }
            }
            const std::size_t block = layout.blocks.size();
            if (edges == m * (m - 1) / 2) {
                if (m > n) {
                    return std::nullopt;
                }
                layout.blocks.push_back({n, m});
                for (std::size_t a = 0; a < m; ++a) {
                    layout.factors[comp[a]][j] = {block, a, 1, std::nullopt};
                }
                continue;
            }
            // A star: one center adjacent to every other member, no other edges.
            auto center = std::find_if(comp.begin(), comp.end(), [&](std::size_t c) {
                return std::count(adj[c].begin(), adj[c].end(), true) ==
                       static_cast<std::ptrdiff_t>(m - 1);
            });
            if (center == comp.end() || edges != m - 1 || n < 2) {
                return std::nullopt;
            }
            layout.blocks.push_back({n, n});
            layout.factors[*center][j] = {block, 0, 1, std::nullopt};
            for (std::size_t leaf : comp) {
                if (leaf == *center) {
                    continue;
                }
                if (n == 2) {
                    layout.factors[leaf][j] = {block, 1, 1, std::nullopt};
                } else {
                    const std::size_t coef = layout.blocks.size();
                    layout.blocks.push_back({n - 1, 1});
                    layout.factors[leaf][j] = {block, 1, n - 1, coef};
                }
            }
        }
    }
    return layout;
}

FrameLayout con_layout(const std::vector<std::size_t>& dims, std::size_t rank, bool symmetric) {
    FrameLayout layout;
    layout.label = symmetric ? "con-symmetric" : "con";
    layout.factors.assign(rank, std::vector<FactorSource>(dims.size()));
    if (symmetric) {
        if (!cubical(dims)) {
            throw ShapeError("symmetric terms need equal dimensions in every mode");
        }
        layout.blocks.push_back({dims.front(), rank});
    }
    for (std::size_t j = 0; j < dims.size(); ++j) {
        std::size_t block = 0;
        if (!symmetric) {
            block = layout.blocks.size();
            layout.blocks.push_back({dims[j], rank});
        }
        for (std::size_t k = 0; k < rank; ++k) {
            layout.factors[k][j] = {block, k, 1, std::nullopt};
        }
    }
    return layout;
}

FrameLayout pcon_layout(const std::vector<std::size_t>& dims, std::size_t rank,
                        const std::vector<std::size_t>& modes, bool structured) {
    FrameLayout layout;
    layout.label = structured ? "pcon-structured" : "pcon";
    const std::size_t d = dims.size();
    layout.factors.assign(rank, std::vector<FactorSource>(d));
    std::vector<bool> in_p(d, false);
    for (auto j : modes) {
        in_p.at(j) = true;
    }
    if (structured) {
        std::optional<std::size_t> p_dim, q_dim;
        for (std::size_t j = 0; j < d; ++j) {
            auto& slot = in_p[j] ? p_dim : q_dim;
            if (slot && *slot != dims[j]) {
                throw ShapeError("structured PCON needs equal dimensions within the mode subset and within its complement");
            }
            slot = dims[j];
        }
        const std::size_t frame = layout.blocks.size();
        layout.blocks.push_back({*p_dim, rank});
        std::vector<std::size_t> free_block(rank);
        if (q_dim) {
            for (std::size_t k = 0; k < rank; ++k) {
                free_block[k] = layout.blocks.size();
                layout.blocks.push_back(sphere(*q_dim));
            }
        }
        for (std::size_t k = 0; k < rank; ++k) {
            for (std::size_t j = 0; j < d; ++j) {
                layout.factors[k][j] = in_p[j] ? FactorSource{frame, k, 1, std::nullopt}
                                               : FactorSource{free_block[k], 0, 1, std::nullopt};
            }
        }
        return layout;
    }
    for (std::size_t j = 0; j < d; ++j) {
        if (in_p[j]) {
            const std::size_t block = layout.blocks.size();
            layout.blocks.push_back({dims[j], rank});
            for (std::size_t k = 0; k < rank; ++k) {
                layout.factors[k][j] = {block, k, 1, std::nullopt};
            }
        } else {
            for (std::size_t k = 0; k < rank; ++k) {
                layout.factors[k][j] = {layout.blocks.size(), 0, 1, std::nullopt};
                layout.blocks.push_back(sphere(dims[j]));
            }
        }
    }
    return layout;
}

std::vector<FrameLayout> cross_layouts(const std::vector<std::size_t>& dims, std::size_t rank,
                                       bool symmetric) {
    if (!cubical(dims)) {
        throw ShapeError("cross orthogonality compares factors across modes; dimensions must agree");
    }
    const std::size_t n = dims.front(), d = dims.size();
    if (symmetric) {
        auto layout = con_layout(dims, rank, true);
        layout.label = "cross-symmetric";
        return {layout};
    }
    const std::size_t total = std::min(n, rank * d);
    // Column counts per term, nonincreasing: terms are interchangeable.
    std::vector<std::vector<std::size_t>> splits;
    std::vector<std::size_t> current;
    std::function<void(std::size_t, std::size_t)> split = [&](std::size_t left, std::size_t cap) {
        if (current.size() == rank) {
            if (left == 0) {
                splits.push_back(current);
            }
            return;
        }
        const std::size_t remaining = rank - current.size();
        for (std::size_t m = std::min(cap, left); m >= 1; --m) {
            if (left - m < remaining - 1 || left - m > (remaining - 1) * m) {
                continue;
            }
            current.push_back(m);
            split(left - m, m);
            current.pop_back();
        }
    };
    split(total, d);
    std::vector<FrameLayout> out;
    for (const auto& widths : splits) {
        FrameLayout layout;
        layout.label = "cross[" + partition_string(widths) + "]";
        layout.blocks.push_back({n, total});
        layout.factors.assign(rank, std::vector<FactorSource>(d));
        std::size_t offset = 0;
        for (std::size_t k = 0; k < rank; ++k) {
            for (std::size_t j = 0; j < d; ++j) {
                if (widths[k] == 1) {
                    layout.factors[k][j] = {0, offset, 1, std::nullopt};
                } else {
                    layout.factors[k][j] = {0, offset, widths[k], layout.blocks.size()};
                    layout.blocks.push_back({widths[k], 1});
                }
            }
            offset += widths[k];
        }
        out.push_back(std::move(layout));
    }
    return out;
}

FrameLayout free_layout(const std::vector<std::size_t>& dims, std::size_t rank) {
    FrameLayout layout;
    layout.label = "free";
    layout.factors.assign(rank, std::vector<FactorSource>(dims.size()));
    for (std::size_t k = 0; k < rank; ++k) {
        for (std::size_t j = 0; j < dims.size(); ++j) {
            layout.factors[k][j] = {layout.blocks.size(), 0, 1, std::nullopt};
            layout.blocks.push_back(sphere(dims[j]));
        }
    }
    return layout;
}

FramePoint point_from_factors(const FrameLayout& layout, const FactorLists& factors,
                              std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    FramePoint x;
    std::vector<std::vector<bool>> filled;
    for (const auto& b : layout.blocks) {
        Mat m(static_cast<Eigen::Index>(b.dim), static_cast<Eigen::Index>(b.cols));
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                m(r, c) = normal(rng);
            }
        }
        x.push_back(std::move(m));
        filled.emplace_back(b.cols, false);
    }
    for (std::size_t k = 0; k < layout.factors.size(); ++k) {
        for (std::size_t j = 0; j < layout.factors[k].size(); ++j) {
            const auto& src = layout.factors[k][j];
            if (!src.coefficient && !filled[src.block][src.column]) {
                x[src.block].col(static_cast<Eigen::Index>(src.column)) = factors[k][j];
                filled[src.block][src.column] = true;
            }
        }
    }
    for (std::size_t b = 0; b < x.size(); ++b) {
        Mat& m = x[b];
        // Modified Gram-Schmidt keeps the leading (given) columns in place.
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            for (int pass = 0; pass < 2; ++pass) {
                for (Eigen::Index p = 0; p < c; ++p) {
                    m.col(c) -= m.col(p).dot(m.col(c)) * m.col(p);
                }
            }
            double n = m.col(c).norm();
            while (n < 1e-8) {
                for (Eigen::Index r = 0; r < m.rows(); ++r) {
                    m(r, c) = normal(rng);
                }
                for (Eigen::Index p = 0; p < c; ++p) {
                    m.col(c) -= m.col(p).dot(m.col(c)) * m.col(p);
                }
                n = m.col(c).norm();
            }
            m.col(c) /= n;
        }
    }
    for (std::size_t k = 0; k < layout.factors.size(); ++k) {
        for (std::size_t j = 0; j < layout.factors[k].size(); ++j) {
            const auto& src = layout.factors[k][j];
            if (!src.coefficient) {
                continue;
            }
            Vec c = x[src.block]
                        .middleCols(static_cast<Eigen::Index>(src.column),
                                    static_cast<Eigen::Index>(src.width))
                        .transpose() *
                    factors[k][j];
            const double n = c.norm();
            if (n > 1e-12) {
                x[*src.coefficient].col(0) = c / n;
            } else {
                x[*src.coefficient].col(0) = polar(x[*src.coefficient]);
            }
        }
    }
    return x;
}

} // namespace symortho
