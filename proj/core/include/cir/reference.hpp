#pragma once

#include <string_view>
#include <vector>

#include "cir/matcore.hpp"

namespace cir {

enum class ReferenceKind { Step, Sine, Sawtooth };

// One output channel of a generated reference, indexed by sample k.
//   step:     offset + amplitude once k >= start, offset before
//   sine:     offset + amplitude sin(2π k / period + phase)
//   sawtooth: offset + amplitude frac(k / period + phase / 2π); a ramp from
//             0 to amplitude over one period that resets instantly
struct ChannelReference {
    ReferenceKind kind = ReferenceKind::Step;
    double amplitude = 1.0;
    double period = 100.0; // samples
    double offset = 0.0;
    double phase = 0.0;    // radians
    int start = 0;

    double value(int k) const;
};

ReferenceKind parse_reference_kind(std::string_view name);

// Desired output sequence. Generated signals are defined for every k >= 0;
// sampled ones for rows 0 .. samples.rows() - 1.
class ReferenceSignal {
public:
    static ReferenceSignal generated(std::vector<ChannelReference> channels);
    // rows are samples k = 0, 1, ...; columns are output channels.
    static ReferenceSignal sampled(Matrix samples);

    int channels() const;
    bool is_sampled() const { return sampled_; }
    // Largest k for which at(k) is defined (INT_MAX for generated signals).
    int last_index() const;

    Vector at(int k) const;

    // Rows first .. last (inclusive) as a (last - first + 1) x channels matrix.
    Matrix window(int first, int last) const;

private:
    bool sampled_ = false;
    std::vector<ChannelReference> generators_;
    Matrix samples_;
};

} // namespace cir
