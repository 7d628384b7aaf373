#include "mwalk/walk.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "mwalk/errors.hpp"

namespace mwalk {

size_t WalkModel::num_classes() const {
    if (membrane) return membrane->lattice().size();
    if (!env->is_iid()) return env->lattice().size();
    return 1;
}

const PeriodLattice* WalkModel::lattice() const {
    if (membrane) return &membrane->lattice();
    if (!env->is_iid()) return &env->lattice();
    return nullptr;
}

namespace {

// Draws uniform values in [0, 2m) from batched bits of the generator.
struct MoveSampler {
    explicit MoveSampler(uint32_t range) : range_(range) {
        bits_ = 1;
        while ((uint32_t(1) << bits_) < range) ++bits_;
        mask_ = (uint64_t(1) << bits_) - 1;
    }

    uint32_t next(Rng& rng) {
        for (;;) {
            if (left_ == 0) {
                buf_ = rng.next_u64();
                left_ = 64 / bits_;
            }
            uint32_t v = uint32_t(buf_ & mask_);
            buf_ >>= bits_;
            --left_;
            if (v < range_) return v;
        }
    }

    uint32_t range_;
    int bits_ = 0;
    uint64_t mask_ = 0;
    uint64_t buf_ = 0;
    int left_ = 0;
};

// Precomputed membrane move: exit sign, class after the slide, and the slide
// itself, laid out for the hot loop.
struct FlatMove {
    int exit_sign;
    uint32_t new_cls;
    const int64_t* slide;
    const int* new_residues;
    double cum;
};

struct Walker {
    const WalkModel& model;
    const ValidatedMembrane* memb;
    const OneSidedEnvironment* env;
    int m;
    int tang; // m - 1
    size_t u;
    const PeriodLattice* lat;
    int64_t y_bound;
    double bias_x;

    // live state
    int64_t x = 0;
    int side = 0;               // valid when x == 0
    std::vector<int64_t> y;
    std::vector<int> cls;       // per-coordinate residues, tracked only when u > 1
    uint32_t cls_lin = 0;
    int exsign = 1;
    int64_t active = -1;

    // counters
    uint64_t visits_seen = 0;
    uint64_t departures = 0;
    uint64_t skip_visits = 0;
    std::vector<int64_t> visit_counts;
    std::vector<int64_t> l_type, m_type, occ_type, m_y, d_y;
    std::vector<VisitRecord>* visit_log = nullptr;
    uint64_t step_index = 0;

    // flattened membrane kernel: entry (side,j) covers moves
    // [entry_off[side*u+j], entry_off[side*u+j]+entry_len[side*u+j])
    std::vector<FlatMove> flat;
    std::vector<size_t> entry_off, entry_len;
    std::vector<int> residue_pool;
    std::vector<double> env_table; // periodic one-sided exit probabilities

    Walker(const WalkModel& mdl, const RecordOptions& opts)
        : model(mdl), memb(mdl.membrane), env(mdl.env), m(mdl.m()), tang(mdl.m() - 1),
          u(mdl.num_classes()), lat(mdl.lattice()), y_bound(opts.y_bound),
          bias_x(opts.bias_x) {
        y.assign(size_t(tang), 0);
        cls.assign(size_t(tang), 0);
        visit_counts.assign(2 * u, 0);
        l_type.assign(2 * u, 0);
        m_type.assign(2 * u, 0);
        occ_type.assign(2 * u, 0);
        m_y.assign(size_t(tang), 0);
        d_y.assign(size_t(tang), 0);
        skip_visits = opts.skip_first_visits;
        if (memb) flatten_kernel();
        if (env && !env->is_iid()) {
            env_table.resize(u);
            for (size_t j = 0; j < u; ++j) env_table[j] = env->p_by_class(j);
        }
    }

    void flatten_kernel() {
        size_t total = 0;
        for (int s = 0; s < 2; ++s)
            for (size_t j = 0; j < u; ++j) total += memb->entry(Side(s), j).size();
        flat.reserve(total);
        residue_pool.reserve(total * size_t(tang));
        entry_off.assign(2 * u, 0);
        entry_len.assign(2 * u, 0);
        for (int s = 0; s < 2; ++s) {
            for (size_t j = 0; j < u; ++j) {
                const auto& moves = memb->entry(Side(s), j);
                const auto& cum = memb->cumulative(Side(s), j);
                entry_off[size_t(s) * u + j] = flat.size();
                entry_len[size_t(s) * u + j] = moves.size();
                for (size_t q = 0; q < moves.size(); ++q) {
                    FlatMove fm;
                    fm.exit_sign = moves[q].exit == Side::Right ? 1 : -1;
                    fm.new_cls = uint32_t(memb->exit_class(Side(s), j, q));
                    fm.slide = moves[q].slide.data();
                    auto tup = lat->tuple(fm.new_cls);
                    size_t base = residue_pool.size();
                    for (int l = 0; l < tang; ++l) residue_pool.push_back(int(tup[size_t(l)]));
                    fm.new_residues = nullptr; // patched after pool stops moving
                    fm.cum = cum[q];
                    flat.push_back(fm);
                    (void)base;
                }
            }
        }
        for (size_t i = 0; i < flat.size(); ++i)
            flat[i].new_residues = residue_pool.data() + i * size_t(tang);
    }

    void set_start(const WalkState& st) {
        x = st.x;
        for (int l = 0; l < tang; ++l) y[size_t(l)] = st.y[size_t(l)];
        sync_classes();
        if (x == 0) {
            side = st.membrane_side && *st.membrane_side == Side::Right ? 1 : 0;
            count_visit();
        } else {
            exsign = x > 0 ? 1 : -1;
            active = int64_t(exsign > 0 ? u + cls_lin : cls_lin);
        }
    }

    void sync_classes() {
        cls_lin = 0;
        if (u == 1) return;
        Coords probe(y.begin(), y.end());
        cls_lin = uint32_t(lat->class_of(probe));
        auto tup = lat->tuple(cls_lin);
        for (int l = 0; l < tang; ++l) cls[size_t(l)] = int(tup[size_t(l)]);
    }

    void count_visit() {
        ++visits_seen;
        if (visits_seen > skip_visits) ++visit_counts[size_t(side) * u + cls_lin];
        if (visit_log) visit_log->push_back({step_index, Side(side), cls_lin});
    }

    void arrive() {
        side = exsign > 0 ? 1 : 0;
        if (u > 1) {
            uint32_t lin = 0;
            for (int l = 0; l < tang; ++l)
                lin = uint32_t(int64_t(lin) * lat->periods()[size_t(l)] + cls[size_t(l)]);
            cls_lin = lin;
        }
        count_visit();
    }

    void check_bound(int64_t v) const {
        if (v >= y_bound || v <= -y_bound)
            throw OverflowGuard("tangential coordinate reached 2^62; rescale the run");
    }

    void depart_two_sided(Rng& rng) {
        double dv = rng.next_double();
        size_t idx = size_t(side) * u + cls_lin;
        const FlatMove* fm = &flat[entry_off[idx]];
        size_t len = entry_len[idx];
        for (size_t q = 0; q + 1 < len && dv > fm->cum; ++q) ++fm;
        int64_t type = int64_t(fm->exit_sign > 0 ? u + cls_lin : cls_lin);
        ++l_type[size_t(type)];
        ++departures;
        active = type;
        exsign = fm->exit_sign;
        x = fm->exit_sign;
        if (memb->has_slides()) {
            for (int l = 0; l < tang; ++l) {
                int64_t s = fm->slide[size_t(l)];
                if (s != 0) {
                    y[size_t(l)] += s;
                    d_y[size_t(l)] += s;
                    check_bound(y[size_t(l)]);
                }
                cls[size_t(l)] = fm->new_residues[size_t(l)];
            }
            cls_lin = fm->new_cls;
        }
    }

    void depart_one_sided(Rng& rng) {
        double p = env_table.empty() ? env->p(y) : env_table[cls_lin];
        double dv = rng.next_double();
        int sgn = dv < p ? 1 : -1;
        int64_t type = int64_t(sgn > 0 ? u + cls_lin : cls_lin);
        ++l_type[size_t(type)];
        ++departures;
        active = type;
        exsign = sgn;
        x = sgn;
    }

    // One off-membrane step; mv in [0, 2m): 0 -> +x, 1 -> -x, 2l+2/2l+3 -> -+y_l.
    void free_step(uint32_t mv) {
        ++occ_type[size_t(active)];
        if (mv < 2) {
            int dx = mv == 0 ? 1 : -1;
            x += dx;
            m_type[size_t(active)] += exsign * dx;
            if (x == 0) arrive();
        } else {
            int l = int(mv - 2) >> 1;
            int d = (mv & 1) ? 1 : -1;
            int64_t ny = y[size_t(l)] + d;
            y[size_t(l)] = ny;
            m_y[size_t(l)] += d;
            check_bound(ny);
            if (u > 1) {
                int c = cls[size_t(l)] + d;
                int k = int(lat->periods()[size_t(l)]);
                if (c == k) c = 0;
                else if (c < 0) c = k - 1;
                cls[size_t(l)] = c;
            }
        }
    }

    uint32_t biased_move(Rng& rng) const {
        // shift probability mass bias_x from the -x move to the +x move
        double dv = rng.next_double();
        double base = 1.0 / double(2 * m);
        if (dv < base + bias_x) return 0;
        if (dv < 2.0 * base) return 1;
        uint32_t idx = uint32_t((dv - 2.0 * base) / base);
        if (idx > uint32_t(2 * m - 3)) idx = uint32_t(2 * m - 3);
        return 2 + idx;
    }

    WalkState state() const {
        WalkState st;
        st.x = x;
        if (x == 0) st.membrane_side = Side(side);
        st.y.assign(y.begin(), y.end());
        return st;
    }
};

WalkState start_state(const WalkModel& model, const RecordOptions& opts, Rng& rng) {
    WalkState st;
    int tang = model.m() - 1;
    st.y.assign(size_t(tang), 0);
    switch (opts.start) {
        case RecordOptions::Start::MembraneLeft:
            st.membrane_side = Side::Left;
            break;
        case RecordOptions::Start::MembraneRight:
            st.membrane_side = Side::Right;
            break;
        case RecordOptions::Start::Custom:
            st = opts.custom_start;
            if (int(st.y.size()) != tang)
                throw DimensionMismatch("custom start has wrong tangential dimension");
            if (st.x == 0 && !st.membrane_side)
                throw Error("custom start on the membrane needs a side");
            break;
        case RecordOptions::Start::Stationary: {
            if (!opts.chain)
                throw PipelineMissing("stationary start requires the embedded chain");
            double dv = rng.next_double();
            size_t n = opts.chain->pi.size();
            size_t pick = n - 1;
            double acc = 0.0;
            for (size_t i = 0; i < n; ++i) {
                acc += opts.chain->pi[i];
                if (dv <= acc) { pick = i; break; }
            }
            size_t uu = opts.chain->u;
            st.membrane_side = pick < uu ? Side::Left : Side::Right;
            auto tup = opts.chain->lattice.tuple(pick % uu);
            for (int l = 0; l < tang; ++l) st.y[size_t(l)] = tup[size_t(l)];
            break;
        }
    }
    return st;
}

} // namespace

WalkState step(const WalkState& state, const WalkModel& model, Rng& rng) {
    if (int(state.y.size()) != model.m() - 1)
        throw DimensionMismatch("state tangential dimension does not match the model");
    if (state.x == 0 && !state.membrane_side)
        throw Error("membrane state needs an arrival side");
    RecordOptions opts;
    opts.start = RecordOptions::Start::Custom;
    opts.custom_start = state;
    Walker w(model, opts);
    w.set_start(state);
    if (w.x == 0) {
        if (model.is_two_sided()) w.depart_two_sided(rng);
        else w.depart_one_sided(rng);
    } else {
        MoveSampler ms(uint32_t(2 * model.m()));
        w.free_step(ms.next(rng));
    }
    return w.state();
}

Trajectory simulate(const WalkModel& model, uint64_t steps, uint64_t seed,
                    const RecordOptions& opts) {
    if (opts.bias_x < 0.0 || opts.bias_x > 1.0 / double(2 * model.m()))
        throw Error("bias outside the representable range");

    Rng rng = Rng::stream(seed, opts.stream_index);
    Trajectory traj;
    traj.n = steps;
    traj.m = model.m();
    traj.u = model.num_classes();
    traj.master_seed = seed;
    traj.stream_index = opts.stream_index;

    Walker w(model, opts);
    if (opts.visit_log) w.visit_log = &traj.visit_log;
    WalkState st0 = start_state(model, opts, rng);
    w.set_start(st0);
    traj.start = st0;
    if (st0.x != 0) traj.start_type = w.active;

    std::vector<uint64_t> marks(opts.extra_indices);
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
    size_t next_mark = 0;
    uint64_t stride = opts.stride;

    auto want = [&](uint64_t k) {
        bool hit = false;
        if (stride != 0 && k % stride == 0) hit = true;
        while (next_mark < marks.size() && marks[next_mark] < k) ++next_mark;
        if (next_mark < marks.size() && marks[next_mark] == k) { hit = true; ++next_mark; }
        return hit;
    };
    if (want(0)) traj.samples.emplace_back(0, w.state());

    MoveSampler ms(uint32_t(2 * model.m()));
    bool two = model.is_two_sided();
    bool biased = opts.bias_x != 0.0;
    bool thin = stride != 0 || !marks.empty();

    for (uint64_t k = 1; k <= steps; ++k) {
        w.step_index = k;
        if (w.x == 0) {
            if (two) w.depart_two_sided(rng);
            else w.depart_one_sided(rng);
        } else {
            w.free_step(biased ? w.biased_move(rng) : ms.next(rng));
        }
        if (thin && want(k)) traj.samples.emplace_back(k, w.state());
    }

    traj.final_state = w.state();
    traj.visits_seen = w.visits_seen;
    traj.departures = w.departures;
    traj.visit_counts = std::move(w.visit_counts);
    traj.l_type = std::move(w.l_type);
    traj.m_type = std::move(w.m_type);
    traj.occ_type = std::move(w.occ_type);
    traj.m_y = std::move(w.m_y);
    traj.d_y = std::move(w.d_y);
    return traj;
}

std::vector<ScaledPoint> scaled(const Trajectory& traj, uint64_t n,
                                const std::vector<double>& t_grid) {
    std::vector<ScaledPoint> out;
    out.reserve(t_grid.size());
    double root = std::sqrt(double(n));
    for (double t : t_grid) {
        if (t < 0.0) throw GridOutOfRange("negative grid time");
        uint64_t idx = uint64_t(std::floor(double(n) * t));
        if (idx > traj.n) throw GridOutOfRange("grid time beyond the simulated horizon");
        auto it = std::lower_bound(traj.samples.begin(), traj.samples.end(), idx,
                                   [](const auto& a, uint64_t b) { return a.first < b; });
        if (it == traj.samples.end() || it->first != idx)
            throw GridOutOfRange("state at the requested step was not recorded");
        ScaledPoint pt;
        pt.t = t;
        pt.x = double(it->second.x) / root;
        pt.y.reserve(it->second.y.size());
        for (int64_t v : it->second.y) pt.y.push_back(double(v) / root);
        out.push_back(std::move(pt));
    }
    return out;
}

std::vector<double> visit_frequencies(const Trajectory& traj) {
    int64_t total = 0;
    for (int64_t c : traj.visit_counts) total += c;
    if (total == 0) throw NoVisits("no membrane visits were recorded");
    std::vector<double> freq(traj.visit_counts.size());
    for (size_t i = 0; i < freq.size(); ++i)
        freq[i] = double(traj.visit_counts[i]) / double(total);
    return freq;
}

double cube_average(const OneSidedEnvironment& env, int64_t A, const Coords& center) {
    if (A < 1) throw Error("cube side must be positive");
    int tang = env.m() - 1;
    if (int(center.size()) != tang)
        throw DimensionMismatch("cube center has wrong dimension");
    Coords lo(center);
    for (int l = 0; l < tang; ++l) {
        int64_t half = (A - 1) / 2;
        lo[size_t(l)] -= half;
    }
    Coords pt(lo);
    double sum = 0.0;
    uint64_t count = 0;
    for (;;) {
        sum += env.p(pt);
        ++count;
        int l = 0;
        for (; l < tang; ++l) {
            if (++pt[size_t(l)] < lo[size_t(l)] + A) break;
            pt[size_t(l)] = lo[size_t(l)];
        }
        if (l == tang) break;
    }
    return sum / double(count);
}

std::vector<HittingRecord> hitting_records(const WalkModel& model, uint64_t n_records,
                                           uint64_t seed, uint64_t step_cap) {
    if (model.is_two_sided() && model.membrane->has_slides())
        throw Error("hitting records require a slide-free model");
    int tang = model.m() - 1;
    Rng rng = Rng::stream(seed, 0);
    RecordOptions opts;
    Walker w(model, opts);
    WalkState st;
    st.membrane_side = Side::Left;
    st.y.assign(size_t(tang), 0);
    w.set_start(st);

    MoveSampler ms(uint32_t(2 * model.m()));
    bool two = model.is_two_sided();
    std::vector<HittingRecord> out;
    out.reserve(n_records);
    uint64_t last_step = 0;
    Coords last_y(w.y.begin(), w.y.end());
    uint64_t k = 0;
    uint64_t last_visits = w.visits_seen;
    while (out.size() < n_records) {
        ++k;
        if (w.x == 0) {
            if (two) w.depart_two_sided(rng);
            else w.depart_one_sided(rng);
        } else {
            w.free_step(ms.next(rng));
        }
        if (step_cap != 0 && k - last_step > step_cap)
            throw BudgetTooSmall("excursion exceeded the step cap");
        if (w.visits_seen != last_visits) {
            last_visits = w.visits_seen;
            HittingRecord rec;
            rec.duration = k - last_step;
            rec.dy.resize(size_t(tang));
            for (int l = 0; l < tang; ++l) {
                rec.dy[size_t(l)] = w.y[size_t(l)] - last_y[size_t(l)];
                last_y[size_t(l)] = w.y[size_t(l)];
            }
            last_step = k;
            out.push_back(std::move(rec));
        }
    }
    return out;
}

} // namespace mwalk
