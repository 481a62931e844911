#include <cmath>

#include "mfris/optimizer.hpp"
#include "optimizer_internal.hpp"

namespace mfris {

namespace {

double margin_of(const SurfaceState& st, const ChannelView& ch, const BeamformerState& bm,
                 const ScenarioConfig& cfg) {
    return sustainability_margin(st, ch.H, bm.F, cfg.sigma1_sq, cfg.energy);
}

} // namespace

AoResult alternating_optimize(const ChannelView& ch, const ScenarioConfig& cfg,
                              const AlgorithmOptions& opts, const AoOptions& ao, RngStream& rng) {
    AoResult result;
    const int M = ch.elements();

    const InitialPoint init = initialize_point(ch, cfg, ao, rng);
    result.beams = init.beams;
    result.surface = init.surface;
    result.surface_active = M > 0 && !ao.skip_surface && init.surface_feasible;
    if (!init.surface_feasible) result.status = "surface-off";

    RisOptions ris = ao.ris;
    if (!result.surface_active) ris.energy = EnergyModel::None; // unpowered surface stays dark

    const bool energy_checked =
        result.surface_active && ao.ris.energy != EnergyModel::None;

    double sr = sum_rate(ch, result.surface, result.beams, cfg.sigma0_sq, cfg.sigma1_sq);

    // Starting at (or above) the surface-free design makes every surface
    // scheme dominate it: the alternation only ever accepts improvements.
    if (result.surface_active) {
        AoOptions dark = ao;
        dark.skip_surface = true;
        const AoResult base = alternating_optimize(ch, cfg, opts, dark, rng);
        const SurfaceState off = SurfaceState::zeros(M);
        const double sr_off =
            sum_rate(ch, off, base.beams, cfg.sigma0_sq, cfg.sigma1_sq);
        SurfaceState carried = result.surface;
        bool carried_ok = true;
        if (ao.ris.energy != EnergyModel::None)
            carried_ok = repair_energy_margin(carried, ch, base.beams, cfg);
        const double sr_carried =
            carried_ok ? sum_rate(ch, carried, base.beams, cfg.sigma0_sq, cfg.sigma1_sq) : -1.0;
        if (sr_carried >= sr && sr_carried >= sr_off) {
            result.beams = base.beams;
            result.surface = std::move(carried);
            sr = sr_carried;
        } else if (sr_off >= sr) {
            result.beams = base.beams;
            result.surface = off;
            sr = sr_off;
        }
        // structured amplification candidates against the surface-free beams
        if (!ao.fixed_alpha) {
            const double cap = ao.ris.beta_cap > 0.0 ? ao.ris.beta_cap : cfg.beta_max;
            for (const int m_a : {1, std::max(1, M / 4), std::max(1, M / 2)}) {
                SurfaceState cand = aligned_surface(ch, base.beams, cfg, m_a, cap);
                if (ao.ris.energy != EnergyModel::None &&
                    margin_of(cand, ch, base.beams, cfg) < 0.0)
                    continue;
                const double sr_cand =
                    sum_rate(ch, cand, base.beams, cfg.sigma0_sq, cfg.sigma1_sq);
                if (sr_cand > sr) {
                    result.beams = base.beams;
                    result.surface = std::move(cand);
                    sr = sr_cand;
                }
            }
        }
    }
    result.sr_trace.push_back(sr);

    for (int outer = 0; outer < opts.max_outer_iterations; ++outer) {
        const double sr_round_start = sr;

        // transmit side
        {
            const SrocrResult rb =
                solve_beamforming_srocr(ch, result.surface, result.beams, cfg, opts, ris);
            double worst_ratio = 1.0;
            for (const double r : rb.rank_ratio) worst_ratio = std::min(worst_ratio, r);
            if (worst_ratio >= opts.rank_ratio_target * 0.999) {
                BeamformerState cand = rb.beams;
                SurfaceState cand_surface = result.surface;
                bool ok = true;
                if (energy_checked && margin_of(cand_surface, ch, cand, cfg) < 0.0)
                    ok = repair_energy_margin(cand_surface, ch, cand, cfg);
                if (ok) {
                    const double sr_cand =
                        sum_rate(ch, cand_surface, cand, cfg.sigma0_sq, cfg.sigma1_sq);
                    if (sr_cand >= sr - 1e-12) {
                        result.beams = std::move(cand);
                        result.surface = std::move(cand_surface);
                        sr = sr_cand;
                    }
                }
            } else if (rb.trace.stalled) {
                result.status = "beam-stall";
            }
            result.sr_trace.push_back(sr);
        }

        // surface side
        if (result.surface_active) {
            RisOptions step = ris;
            if (ao.fixed_alpha) step.optimize_alpha = false;
            const PenaltyResult rr =
                solve_ris_penalty(ch, result.beams, result.surface, cfg, opts, step, rng);
            if (!rr.trace.objective.empty())
                result.pre_rounding_sum_rate = rr.trace.objective.back();
            SurfaceState cand = rr.state;
            bool ok = rr.rank_ratio >= opts.rank_ratio_target * 0.999;
            if (ok && energy_checked && margin_of(cand, ch, result.beams, cfg) < 0.0)
                ok = repair_energy_margin(cand, ch, result.beams, cfg);
            if (ok) {
                const double sr_cand =
                    sum_rate(ch, cand, result.beams, cfg.sigma0_sq, cfg.sigma1_sq);
                if (sr_cand >= sr - 1e-12) {
                    result.surface = std::move(cand);
                    sr = sr_cand;
                }
            }
            result.sr_trace.push_back(sr);
        }

        result.outer_iterations = outer + 1;
        if (std::abs(sr - sr_round_start) <= opts.outer_rel_tol * std::max(1.0, sr_round_start))
            break;
    }

    // Final audit: a returned point always satisfies the original constraints.
    if (result.beams.total_power() > cfg.P_BS_max * (1.0 + 1e-9)) {
        const double scale = std::sqrt(cfg.P_BS_max / result.beams.total_power());
        for (auto& fk : result.beams.f) fk *= scale;
        result.beams = BeamformerState::from_vectors(result.beams.f);
    }
    if (energy_checked && margin_of(result.surface, ch, result.beams, cfg) < kEnergyMarginTolerance)
        repair_energy_margin(result.surface, ch, result.beams, cfg);

    result.sum_rate_value = sum_rate(ch, result.surface, result.beams, cfg.sigma0_sq, cfg.sigma1_sq);
    if (result.pre_rounding_sum_rate == 0.0) result.pre_rounding_sum_rate = result.sum_rate_value;
    return result;
}

} // namespace mfris
