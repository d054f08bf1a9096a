#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ergolab/errors.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

// Finite base distribution kappa(p_1..p_d) on symbols {1..d}.
class Distribution {
public:
    explicit Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
        if (probs_.empty()) throw ConfigError("distribution needs d >= 1");
        double sum = 0.0;
        for (double p : probs_) {
            if (p < 0.0) throw ConfigError("negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("probabilities must sum to 1");
        cum_.reserve(probs_.size());
        double acc = 0.0;
        for (double p : probs_) {
            acc += p;
            cum_.push_back(acc);
        }
        cum_.back() = 1.0;
    }

    static Distribution uniform(int d) {
        return Distribution(std::vector<double>(static_cast<std::size_t>(d), 1.0 / d));
    }

    int d() const { return static_cast<int>(probs_.size()); }
    double p(int symbol) const { return probs_[static_cast<std::size_t>(symbol - 1)]; }
    const std::vector<double>& probs() const { return probs_; }

    // Symbol in {1..d} from a uniform [0,1) draw, via cumulative thresholds.
    int symbol_from_unit(double u) const {
        for (std::size_t i = 0; i + 1 < cum_.size(); ++i)
            if (u < cum_[i]) return static_cast<int>(i) + 1;
        return d();
    }
    int symbol_from_bits(std::uint64_t bits) const { return symbol_from_unit(unit_double(bits)); }

    friend bool operator==(const Distribution& a, const Distribution& b) {
        return a.probs_ == b.probs_;
    }

private:
    std::vector<double> probs_;
    std::vector<double> cum_;
};

}  // namespace ergolab
