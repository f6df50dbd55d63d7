#include "sonify/renderer.hpp"

#include <algorithm>
#include <cmath>

namespace sonify {

namespace {

struct Voice {
    bool active = false;
    std::uint64_t on_frame = 0;
    std::optional<std::uint64_t> off_frame;
};

struct TrackState {
    TrackId id;
    const AttributeSeries* series = nullptr;
    double raw = 0.0;
    double norm = 0.5;
    double frequency = 0.0;
    double phase = 0.0;
    std::optional<DiscreteRule> configured_rule;
    DiscreteRule rule;
    Voice voice;
    bool held = false;     ///< continuous gate currently open
    bool pending = false;  ///< discrete trigger waiting for this track's interleave slot
    bool modulates = false;
    std::vector<std::size_t> modulators;
    int slot = -1;
    PanGains pan;
    double mod_out = 0.0;
    double sum_squares = 0.0;
};

bool same_rule(const std::optional<DiscreteRule>& a, const std::optional<DiscreteRule>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || (a->threshold == b->threshold && a->increment == b->increment);
}

}  // namespace

struct Renderer::Impl {
    std::shared_ptr<const Session> session;
    std::vector<TrackState> tracks;
    std::vector<std::size_t> order;
    Transport transport;
    double period = 0.2;
    double anchor_cursor = 0.0;
    std::uint64_t anchor_frame = 0;
    std::optional<std::size_t> current_row;
    int current_slot = -1;
    std::uint64_t seen_play = 0;
    std::uint64_t seen_reset = 0;
    std::uint64_t alias_warnings = 0;
    BlockReport* report = nullptr;

    bool playing() const { return transport.state == TransportState::Playing; }
    double sample_rate() const { return session->sample_rate; }
    std::size_t length() const { return session->length(); }
    bool interleaving() const { return transport.interleave_enabled && !transport.interleave_set.empty(); }

    double cursor_at(std::uint64_t frame) const {
        return anchor_cursor + static_cast<double>(frame - anchor_frame) / (sample_rate() * period);
    }

    std::uint64_t gate_frames() const {
        return static_cast<std::uint64_t>(std::llround(transport.rate * sample_rate()));
    }

    // A discrete note lasts at least its attack + decay so short rows do not
    // cut the envelope shape off.
    std::uint64_t discrete_gate(const TrackConfig& cfg) const {
        const Envelope& env = cfg.discrete_envelope;
        const auto shape = static_cast<std::uint64_t>(std::llround((env.attack + env.decay) * sample_rate()));
        return std::max(gate_frames(), shape);
    }

    bool member(const TrackState& st) const { return interleaving() && st.slot >= 0; }

    void note_on(TrackState& st, std::uint64_t frame, std::optional<std::uint64_t> gate = std::nullopt) {
        st.voice.active = true;
        st.voice.on_frame = frame;
        st.voice.off_frame = gate ? std::optional(frame + *gate) : std::nullopt;
        st.phase = 0.0;
    }

    static void note_off(TrackState& st, std::uint64_t frame) {
        if (st.voice.active && (!st.voice.off_frame || *st.voice.off_frame > frame)) {
            st.voice.off_frame = frame;
        }
    }

    void update_frequency(TrackState& st, const TrackConfig& cfg) const {
        if (const auto* osc = std::get_if<OscillatorSource>(&cfg.source)) {
            st.frequency = cfg.mappings.frequency ? map_frequency(st.norm, *cfg.mappings.frequency) : osc->frequency;
        } else {
            st.frequency = 0.0;
        }
    }

    double modulation_depth(const TrackState& st, const TrackConfig& cfg) const {
        if (cfg.mappings.modulation_index) {
            return map_modulation_index(st.norm, *cfg.mappings.modulation_index);
        }
        return source_amplitude(cfg.source) * (cfg.mappings.amplitude ? map_amplitude(st.norm) : 1.0);
    }

    void hold_row_values(std::size_t row) {
        for (std::size_t i = 0; i < tracks.size(); ++i) {
            auto& st = tracks[i];
            if (st.series == nullptr) continue;
            st.raw = (*st.series)[row];
            st.norm = normalize_value(*st.series, session->normalization, st.raw);
            update_frequency(st, session->tracks[i]);
        }
    }

    void check_aliasing() {
        const double nyquist = sample_rate() / 2.0;
        for (std::size_t i = 0; i < tracks.size(); ++i) {
            const auto& st = tracks[i];
            if (st.modulators.empty()) continue;
            double top = st.frequency;
            for (const auto m : st.modulators) {
                top += std::abs(modulation_depth(tracks[m], session->tracks[m])) * tracks[m].frequency;
            }
            if (top >= nyquist) ++alias_warnings;
        }
    }

    void enter_row(std::size_t row, std::uint64_t frame) {
        current_row = row;
        current_slot = -1;
        hold_row_values(row);
        for (std::size_t i = 0; i < tracks.size(); ++i) {
            auto& st = tracks[i];
            const auto& cfg = session->tracks[i];
            if (st.series == nullptr) continue;
            if (cfg.mode == PlayMode::Discrete) {
                st.pending = false;
                if (!cfg.discrete) continue;
                const auto step = discrete_step(st.rule, st.raw);
                st.rule = step.rule;
                if (!step.trigger) continue;
                if (report) report->triggers.push_back({frame, st.id, row, st.raw});
                if (member(st)) {
                    st.pending = true;
                } else {
                    note_on(st, frame, discrete_gate(cfg));
                }
            } else if (!is_oscillator(cfg.source) && !member(st)) {
                // continuous sample tracks replay the sample on every row
                note_on(st, frame);
            }
        }
        check_aliasing();
    }

    void enter_slot(int slot, std::uint64_t frame) {
        current_slot = slot;
        for (std::size_t i = 0; i < tracks.size(); ++i) {
            auto& st = tracks[i];
            if (st.slot != slot) continue;
            if (session->tracks[i].mode == PlayMode::Continuous) {
                note_on(st, frame, gate_frames());
            } else if (st.pending) {
                st.pending = false;
                note_on(st, frame, discrete_gate(session->tracks[i]));
            }
        }
    }

    void refresh_gates(std::uint64_t frame) {
        for (std::size_t i = 0; i < tracks.size(); ++i) {
            auto& st = tracks[i];
            const auto& cfg = session->tracks[i];
            const bool want = playing() && cfg.mode == PlayMode::Continuous && is_oscillator(cfg.source) && !member(st);
            if (want && !st.held) {
                note_on(st, frame);
            } else if (!want && st.held) {
                note_off(st, frame);
            }
            st.held = want;
        }
    }

    void start(std::uint64_t frame) {
        if (length() == 0) return;
        if (transport.cursor >= static_cast<double>(length())) {
            transport.cursor = 0.0;
            current_row.reset();
        }
        transport.state = TransportState::Playing;
        anchor_cursor = transport.cursor;
        anchor_frame = frame;
        const auto row = static_cast<std::size_t>(transport.cursor);
        if (current_row != row) {
            enter_row(row, frame);
        }
        current_slot = -1;
        refresh_gates(frame);
    }

    void stop(std::uint64_t frame) {
        transport.state = TransportState::Stopped;
        for (auto& st : tracks) {
            note_off(st, frame);
            st.held = false;
            st.pending = false;
        }
    }

    void reset(std::uint64_t frame) {
        transport.cursor = 0.0;
        current_row.reset();
        current_slot = -1;
        for (auto& st : tracks) {
            st.voice = Voice{};
            st.held = false;
            st.pending = false;
            if (st.configured_rule) st.rule = *st.configured_rule;
        }
        if (length() > 0) hold_row_values(0);
        if (playing()) {
            anchor_cursor = 0.0;
            anchor_frame = frame;
            enter_row(0, frame);
            refresh_gates(frame);
        }
    }

    void adopt(const std::shared_ptr<const Session>& next, std::uint64_t frame) {
        const auto prev = session;
        const bool dataset_changed = !prev || prev->dataset != next->dataset;
        const double cursor_now = playing() ? cursor_at(frame) : transport.cursor;
        session = next;

        std::vector<TrackState> rebuilt(next->tracks.size());
        for (std::size_t i = 0; i < next->tracks.size(); ++i) {
            const auto& cfg = next->tracks[i];
            auto& st = rebuilt[i];
            if (!dataset_changed) {
                for (const auto& old : tracks) {
                    if (old.id == cfg.id) {
                        st = old;
                        break;
                    }
                }
            }
            st.id = cfg.id;
            st.series = nullptr;
            if (next->dataset) {
                if (const auto idx = next->dataset->index_of(cfg.series)) st.series = &next->dataset->series()[*idx];
            }
            if (!same_rule(st.configured_rule, cfg.discrete) || dataset_changed) {
                st.configured_rule = cfg.discrete;
                if (cfg.discrete) st.rule = DiscreteRule::starting_at(cfg.discrete->threshold, cfg.discrete->increment);
            }
            st.modulates = false;
            st.modulators.clear();
            st.slot = -1;
            st.pan = pan_gains(cfg.pan);
        }
        for (const auto& link : next->links) {
            const auto m = next->track_index(link.modulator);
            const auto c = next->track_index(link.carrier);
            if (!m || !c) continue;
            rebuilt[*m].modulates = true;
            rebuilt[*c].modulators.push_back(*m);
        }
        const auto& ts = next->transport;
        for (std::size_t k = 0; k < ts.interleave_set.size(); ++k) {
            if (const auto idx = next->track_index(ts.interleave_set[k])) rebuilt[*idx].slot = static_cast<int>(k);
        }
        tracks = std::move(rebuilt);
        try {
            order = fm_render_order(*next);
        } catch (const ValidationError&) {
            order.clear();
        }

        transport.rate = ts.rate;
        transport.interleave_enabled = ts.interleave_enabled;
        transport.interleave_set = ts.interleave_set;
        const double new_period = ts.row_period();

        if (dataset_changed) {
            transport.state = TransportState::Stopped;
            transport.cursor = 0.0;
            current_row.reset();
            current_slot = -1;
            seen_reset = ts.reset_serial;
            for (auto& st : tracks) {
                st.voice = Voice{};
                st.phase = 0.0;
                st.held = false;
                st.pending = false;
                st.mod_out = 0.0;
            }
            if (length() > 0) hold_row_values(0);
        } else if (playing()) {
            transport.cursor = std::min(cursor_now, static_cast<double>(length()));
            anchor_cursor = transport.cursor;
            anchor_frame = frame;
        }
        period = new_period;

        if (!dataset_changed && length() > 0 && current_row) {
            hold_row_values(*current_row);
        }
        if (ts.reset_serial != seen_reset) {
            seen_reset = ts.reset_serial;
            reset(frame);
        }
        if (ts.play_serial != seen_play) {
            seen_play = ts.play_serial;
            if (ts.playing && !playing()) start(frame);
        }
        if (!ts.playing && playing()) {
            stop(frame);
        }
        if (playing()) {
            current_slot = interleaving() ? current_slot : -1;
            refresh_gates(frame);
        }
    }

    double envelope_gain(TrackState& st, const TrackConfig& cfg, std::uint64_t frame) const {
        auto& v = st.voice;
        if (!v.active) return 0.0;
        const double t_on = static_cast<double>(frame - v.on_frame) / sample_rate();
        const Envelope& env = cfg.envelope();
        if (v.off_frame && frame >= *v.off_frame) {
            const double t_off = static_cast<double>(frame - *v.off_frame) / sample_rate();
            if (t_off >= env.release) {
                v.active = false;
                return 0.0;
            }
            return adsr_gain(env, t_on, t_off);
        }
        return adsr_gain(env, t_on);
    }

    StereoFrame synthesize(std::uint64_t frame) {
        double left = 0.0;
        double right = 0.0;
        const double sr = sample_rate();
        for (const auto i : order) {
            auto& st = tracks[i];
            const auto& cfg = session->tracks[i];
            const double gain = envelope_gain(st, cfg, frame);
            const double amp = source_amplitude(cfg.source) * (cfg.mappings.amplitude ? map_amplitude(st.norm) : 1.0);
            double out = 0.0;
            if (const auto* osc = std::get_if<OscillatorSource>(&cfg.source)) {
                double offset = 0.0;
                for (const auto m : st.modulators) offset += tracks[m].mod_out;
                const double value = osc_value(osc->waveform, wrap_phase(st.phase + offset / kTwoPi));
                if (st.modulates) {
                    st.mod_out = cfg.muted ? 0.0 : modulation_depth(st, cfg) * value * gain;
                } else {
                    out = amp * gain * value;
                }
                st.phase += st.frequency / sr;
                if (st.phase >= 1.0) st.phase -= std::floor(st.phase);
            } else if (st.voice.active) {
                const auto& sample = std::get<SampleSource>(cfg.source);
                const double t = static_cast<double>(frame - st.voice.on_frame) / sr;
                out = sample.buffer ? gain * sample_voice(*sample.buffer, sample.speed, amp, t) : 0.0;
            }
            if (cfg.muted) out = 0.0;
            left += out * st.pan.left;
            right += out * st.pan.right;
            st.sum_squares += out * out;
        }
        return {std::clamp(left, -1.0, 1.0), std::clamp(right, -1.0, 1.0)};
    }

    void advance_to(std::uint64_t frame) {
        const double c = cursor_at(frame);
        const auto len = length();
        if (c >= static_cast<double>(len)) {
            transport.cursor = static_cast<double>(len);
            stop(frame);
            if (report) report->reached_end = true;
            return;
        }
        transport.cursor = c;
        const auto row = static_cast<std::size_t>(c);
        if (current_row != row) {
            const std::size_t first = current_row ? *current_row + 1 : row;
            for (std::size_t r = first; r <= row; ++r) enter_row(r, frame);
        }
        if (interleaving()) {
            const auto n = static_cast<int>(transport.interleave_set.size());
            const int slot = std::min(n - 1, static_cast<int>((c - static_cast<double>(row)) * n));
            if (slot != current_slot) enter_slot(slot, frame);
        }
    }
};

Renderer::Renderer() : impl_(std::make_unique<Impl>()) {}
Renderer::~Renderer() = default;
Renderer::Renderer(Renderer&&) noexcept = default;
Renderer& Renderer::operator=(Renderer&&) noexcept = default;

StereoBlock Renderer::render_block(const std::shared_ptr<const Session>& snapshot, std::uint64_t start_frame) {
    StereoBlock block;
    block.sample_rate = snapshot ? snapshot->sample_rate : kDefaultSampleRate;
    block.frames.resize(snapshot ? snapshot->block_size : kDefaultBlockSize);
    BlockReport report;
    render_block(snapshot, start_frame, block.frames, report);
    return block;
}

void Renderer::render_block(const std::shared_ptr<const Session>& snapshot, std::uint64_t start_frame,
                            std::span<StereoFrame> out, BlockReport& report) {
    auto& s = *impl_;
    report.start_frame = start_frame;
    report.frames = out.size();
    report.triggers.clear();
    report.meters.clear();
    report.master_sum_squares = 0.0;
    report.reached_end = false;
    report.adopted_revision.reset();

    if (!snapshot) {
        std::fill(out.begin(), out.end(), StereoFrame{});
        report.playing = false;
        return;
    }
    s.report = &report;
    if (snapshot != s.session) {
        s.adopt(snapshot, start_frame);
        report.adopted_revision = snapshot->revision;
    }
    for (auto& st : s.tracks) st.sum_squares = 0.0;

    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::uint64_t frame = start_frame + i;
        if (s.playing()) s.advance_to(frame);
        out[i] = s.synthesize(frame);
        report.master_sum_squares += out[i].left * out[i].left + out[i].right * out[i].right;
    }

    for (std::size_t i = 0; i < s.tracks.size(); ++i) {
        report.meters.push_back({s.tracks[i].id, s.tracks[i].sum_squares, s.tracks[i].frequency});
    }
    report.playing = s.playing();
    report.cursor = s.transport.cursor;
    report.play_serial = s.seen_play;
    s.report = nullptr;
}

const Transport& Renderer::transport() const noexcept {
    return impl_->transport;
}

std::uint64_t Renderer::alias_warnings() const noexcept {
    return impl_->alias_warnings;
}

}  // namespace sonify
