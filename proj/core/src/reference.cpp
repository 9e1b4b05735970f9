#include "cir/reference.hpp"

#include <climits>
#include <cmath>
#include <numbers>
#include <string>

#include "cir/errors.hpp"

namespace cir {

double ChannelReference::value(int k) const {
    switch (kind) {
    case ReferenceKind::Step:
        return k >= start ? offset + amplitude : offset;
    case ReferenceKind::Sine:
        return offset + amplitude * std::sin(2.0 * std::numbers::pi * k / period + phase);
    case ReferenceKind::Sawtooth: {
        const double cycles = k / period + phase / (2.0 * std::numbers::pi);
        return offset + amplitude * (cycles - std::floor(cycles));
    }
    }
    return offset;
}

ReferenceKind parse_reference_kind(std::string_view name) {
    if (name == "step") {
        return ReferenceKind::Step;
    }
    if (name == "sine") {
        return ReferenceKind::Sine;
    }
    if (name == "sawtooth") {
        return ReferenceKind::Sawtooth;
    }
    throw InvalidInputError("unknown reference kind '" + std::string(name) +
                            "' (expected step, sine or sawtooth)");
}

ReferenceSignal ReferenceSignal::generated(std::vector<ChannelReference> channels) {
    if (channels.empty()) {
        throw InvalidInputError("reference: at least one channel is required");
    }
    for (const auto& c : channels) {
        if (!(c.period > 0.0) || !std::isfinite(c.period) || !std::isfinite(c.amplitude) ||
            !std::isfinite(c.offset) || !std::isfinite(c.phase)) {
            throw InvalidInputError("reference: period must be positive and parameters finite");
        }
    }
    ReferenceSignal signal;
    signal.generators_ = std::move(channels);
    return signal;
}

ReferenceSignal ReferenceSignal::sampled(Matrix samples) {
    if (samples.rows() == 0 || samples.cols() == 0) {
        throw InvalidInputError("reference: sample matrix must be non-empty");
    }
    require_finite(samples, "reference samples");
    ReferenceSignal signal;
    signal.sampled_ = true;
    signal.samples_ = std::move(samples);
    return signal;
}

int ReferenceSignal::channels() const {
    return sampled_ ? static_cast<int>(samples_.cols()) : static_cast<int>(generators_.size());
}

int ReferenceSignal::last_index() const {
    return sampled_ ? static_cast<int>(samples_.rows()) - 1 : INT_MAX;
}

Vector ReferenceSignal::at(int k) const {
    if (k < 0 || k > last_index()) {
        throw InvalidInputError("reference: sample " + std::to_string(k) + " is not defined");
    }
    if (sampled_) {
        return samples_.row(k).transpose();
    }
    Vector out(channels());
    for (int i = 0; i < channels(); ++i) {
        out(i) = generators_[static_cast<std::size_t>(i)].value(k);
    }
    return out;
}

Matrix ReferenceSignal::window(int first, int last) const {
    if (last < first) {
        return Matrix(0, channels());
    }
    Matrix out(last - first + 1, channels());
    for (int k = first; k <= last; ++k) {
        out.row(k - first) = at(k).transpose();
    }
    return out;
}

} // namespace cir
