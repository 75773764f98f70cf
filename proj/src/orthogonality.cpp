#include "symortho/orthogonality.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace symortho {

Notion Notion::pcon(std::vector<std::size_t> modes) {
    std::sort(modes.begin(), modes.end());
    modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
    if (modes.empty()) {
        throw ArgumentError("PCON requires a nonempty mode subset");
    }
    return {NotionKind::PCON, std::move(modes)};
}

void Notion::validate(std::size_t order) const {
    if (kind == NotionKind::PCON) {
        if (modes.empty()) {
            throw ArgumentError("PCON requires a nonempty mode subset");
        }
        if (!std::is_sorted(modes.begin(), modes.end()) ||
            std::adjacent_find(modes.begin(), modes.end()) != modes.end()) {
            throw ArgumentError("PCON mode set must be sorted and duplicate-free");
        }
        if (modes.back() >= order) {
            throw ArgumentError("PCON mode " + std::to_string(modes.back() + 1) +
                                " exceeds tensor order " + std::to_string(order));
        }
    } else if (!modes.empty()) {
        throw ArgumentError("a mode subset is only meaningful for PCON");
    }
}

std::string to_string(const Notion& notion) {
    switch (notion.kind) {
    case NotionKind::ON:
        return "ON";
    case NotionKind::SON:
        return "SON";
    case NotionKind::CON:
        return "CON";
    case NotionKind::PCON: {
        std::string out = "PCON{";
        for (std::size_t i = 0; i < notion.modes.size(); ++i) {
            out += (i ? "," : "") + std::to_string(notion.modes[i] + 1);
        }
        return out + "}";
    }
    }
    return "?";
}

Notion parse_notion(std::string_view name, std::vector<std::size_t> modes) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "pcon") {
        return Notion::pcon(std::move(modes));
    }
    if (!modes.empty()) {
        throw ArgumentError("a mode subset is only meaningful for PCON");
    }
    if (lower == "on") {
        return Notion::on();
    }
    if (lower == "son") {
        return Notion::son();
    }
    if (lower == "con") {
        return Notion::con();
    }
    throw ArgumentError("unknown orthogonality notion '" + std::string(name) + "'");
}

template <typename S>
PairCertificate pair_check(const BasicRankOneTerm<S>& x, const BasicRankOneTerm<S>& y,
                           const Notion& notion, double tol) {
    const std::size_t d = x.factors.size();
    if (y.factors.size() != d) {
        throw ShapeError("pair_check: terms have different orders");
    }
    notion.validate(d);
    PairCertificate cert;
    cert.tol = tol;
    cert.mode_inner.reserve(d);
    Complex product{1.0};
    bool every_mode_orthogonal = true;
    bool every_mode_orth_or_parallel = true;
    for (std::size_t j = 0; j < d; ++j) {
        if (x.factors[j].size() != y.factors[j].size()) {
            throw ShapeError("pair_check: factor length mismatch in mode " + std::to_string(j));
        }
        const Complex a = Complex(y.factors[j].dot(x.factors[j]));
        cert.mode_inner.push_back(a);
        product *= a;
        const double mag = std::abs(a);
        const bool orthogonal = mag <= tol;
        // Cauchy-Schwarz equality case: unit vectors are parallel up to phase iff |<x,y>| = 1.
        const bool parallel = (1.0 - mag) <= tol;
        every_mode_orthogonal = every_mode_orthogonal && orthogonal;
        every_mode_orth_or_parallel = every_mode_orth_or_parallel && (orthogonal || parallel);
    }
    cert.on = std::abs(product) <= tol;
    cert.son = cert.on && every_mode_orth_or_parallel;
    cert.con = every_mode_orthogonal;
    switch (notion.kind) {
    case NotionKind::ON:
        cert.holds = cert.on;
        break;
    case NotionKind::SON:
        cert.holds = cert.son;
        break;
    case NotionKind::CON:
        cert.holds = cert.con;
        break;
    case NotionKind::PCON: {
        bool ok = true;
        for (auto j : notion.modes) {
            ok = ok && std::abs(cert.mode_inner[j]) <= tol;
        }
        cert.pcon = ok;
        cert.holds = ok;
        break;
    }
    }
    return cert;
}

template <typename S>
DecompositionCertificate decomposition_check(const BasicDecomposition<S>& decomposition,
                                             const Notion& notion, double tol) {
    notion.validate(decomposition.dims.size());
    DecompositionCertificate cert{notion, tol, {}, true};
    const auto& terms = decomposition.terms;
    for (std::size_t k = 0; k < terms.size(); ++k) {
        if (terms[k].factors.size() != decomposition.dims.size()) {
            throw ShapeError("decomposition_check: term order does not match dims");
        }
        for (std::size_t l = k + 1; l < terms.size(); ++l) {
            auto pair = pair_check(terms[k], terms[l], notion, tol);
            pair.first = k;
            pair.second = l;
            cert.valid = cert.valid && pair.holds;
            cert.pairs.push_back(std::move(pair));
        }
    }
    return cert;
}

template <typename S>
bool cross_orthogonality_check(const BasicDecomposition<S>& decomposition, double tol) {
    const auto& terms = decomposition.terms;
    for (std::size_t k = 0; k < terms.size(); ++k) {
        for (std::size_t l = k + 1; l < terms.size(); ++l) {
            for (const auto& a : terms[k].factors) {
                for (const auto& b : terms[l].factors) {
                    if (a.size() != b.size()) {
                        throw ShapeError("cross_orthogonality_check: factor length mismatch");
                    }
                    if (std::abs(b.dot(a)) > tol) {
                        return false;
                    }
                }
            }
        }
    }
    return true;
}

#define SYMORTHO_INSTANTIATE(S)                                                                    \
    template PairCertificate pair_check<S>(const BasicRankOneTerm<S>&, const BasicRankOneTerm<S>&,  \
                                           const Notion&, double);                                 \
    template DecompositionCertificate decomposition_check<S>(const BasicDecomposition<S>&,          \
                                                             const Notion&, double);               \
    template bool cross_orthogonality_check<S>(const BasicDecomposition<S>&, double);

SYMORTHO_INSTANTIATE(double)
SYMORTHO_INSTANTIATE(Complex)

#undef SYMORTHO_INSTANTIATE

} // namespace symortho
