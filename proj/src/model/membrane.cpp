#include "model/membrane.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace neurodiffuse {

double nernst(const PhysicalConstants& pc, int valence, double conc_r, double conc_R) {
    if (!(conc_r > 0.0) || !(conc_R > 0.0))
        throw InvalidArgument("nernst potential needs positive concentrations");
    return pc.psi() / valence * std::log(conc_R / conc_r);
}

double leak_current(double g_leak, double phi_rR, double nernst_potential) {
    return g_leak * (phi_rR - nernst_potential);
}

double ratio_expm1(double x) {
    if (std::abs(x) < 1e-7)
        return 1.0 - 0.5 * x + x * x / 12.0;
    return x / std::expm1(x);
}

GhkCurrent ghk_current(const PhysicalConstants& pc, double permeability, double gate_factor,
                       double phi_rR, double conc_r, double conc_R) {
    const double F = pc.faraday;
    const double psi = pc.psi();
    const double mu = phi_rR / psi;
    const double pg = permeability * gate_factor * F;

    // r(mu) = mu/(1 - e^{-mu}), series branch below |mu| = 1e-4.
    double r, dr;
    const double t = std::exp(-mu);
    if (std::abs(mu) < 1e-4) {
        r = 1.0 + 0.5 * mu + mu * mu / 12.0;
        dr = 0.5 + mu / 6.0;
    } else {
        const double denom = 1.0 - t;
        r = mu / denom;
        dr = (denom - mu * t) / (denom * denom);
    }

    GhkCurrent out;
    const double carrier = conc_r - conc_R * t;
    out.value = pg * r * carrier;
    out.d_conc_r = pg * r;
    out.d_conc_R = -pg * r * t;
    const double d_mu = pg * (dr * carrier + r * conc_R * t);
    out.d_phi = d_mu / psi;
    return out;
}

namespace {
constexpr double kMsToS = 1e3; // tabulated rates are 1/ms
}

ChannelRates gating_rates(Channel ch, double phi_mv, bool ka_literal) {
    ChannelRates out;
    switch (ch) {
    case Channel::NaP: {
        const double am = 1.0 / (6.0 + 6.0 * std::exp(-0.143 * phi_mv - 5.67));
        out.m.alpha = kMsToS * am;
        out.m.beta = kMsToS * (1.0 / 6.0 - am);
        out.h.alpha = kMsToS * 5.12e-8 * std::exp(-0.056 * phi_mv - 2.94);
        out.h.beta = kMsToS * 1.6e-6 / (1.0 + std::exp(-0.2 * phi_mv - 8.0));
        return out;
    }
    case Channel::KDR: {
        // 0.016 (-phi - 34.9) / (exp(-0.2 phi - 6.98) - 1), removable at -34.9 mV.
        const double u = -0.2 * (phi_mv + 34.9);
        out.m.alpha = kMsToS * 0.08 * ratio_expm1(u);
        out.m.beta = kMsToS * 0.25 * std::exp(-0.025 * phi_mv - 1.25);
        return out;
    }
    case Channel::KA: {
        if (ka_literal) {
            out.m.alpha = kMsToS * 0.02 * (-phi_mv - 56.9) /
                          (std::exp(-0.1 * phi_mv - 56.9) - 1.0);
            out.m.beta = kMsToS * 0.0175 * (phi_mv + 29.9) /
                         (std::exp(0.1 * phi_mv + 29.9) - 1.0);
        } else {
            const double u = -0.1 * (phi_mv + 56.9);
            out.m.alpha = kMsToS * 0.2 * ratio_expm1(u);
            const double w = 0.1 * (phi_mv + 29.9);
            out.m.beta = kMsToS * 0.175 * ratio_expm1(w);
        }
        out.h.alpha = kMsToS * 0.016 * std::exp(-0.05 * phi_mv - 4.61);
        out.h.beta = kMsToS * 0.5 / (std::exp(-0.2 * phi_mv - 11.98) + 1.0);
        return out;
    }
    }
    return out;
}

double gating_rhs(double y, const GateRatePair& r) {
    return r.alpha * (1.0 - y) - r.beta * y;
}

PumpCurrent pump_current(double pump_max, double m_k, double m_na,
                         double conc_k_ecs, double conc_na_r) {
    if (!(conc_k_ecs > 0.0) || !(conc_na_r > 0.0))
        throw InvalidArgument("pump current needs positive concentrations");
    const double fk = 1.0 + m_k / conc_k_ecs;
    const double fn = 1.0 + m_na / conc_na_r;
    PumpCurrent out;
    out.value = pump_max / (fk * fk * fn * fn * fn);
    out.d_conc_k_ecs = out.value * 2.0 * m_k / (conc_k_ecs * conc_k_ecs * fk);
    out.d_conc_na_r = out.value * 3.0 * m_na / (conc_na_r * conc_na_r * fn);
    return out;
}

KirConductance kir_conductance(double g0, double conc_k_ecs, double phi_ge_mv,
                               double nernst_k_mv) {
    if (!(conc_k_ecs > 0.0))
        throw InvalidArgument("kir conductance needs positive ECS potassium");
    const double root = std::sqrt(conc_k_ecs / 3.0);

    const double num1 = 1.0 + std::exp(18.5 / 42.5);
    const double e1 = std::exp((phi_ge_mv - nernst_k_mv + 18.5) / 42.5);
    const double den1 = 1.0 + e1;

    const double num2 = 1.0 + std::exp((-118.6 - 85.2) / 44.1);
    const double e2 = std::exp((-118.6 + phi_ge_mv) / 44.1);
    const double den2 = 1.0 + e2;

    KirConductance out;
    out.value = g0 * root * (num1 / den1) * (num2 / den2);
    if (out.value == 0.0)
        return out;
    const double d1 = -e1 / den1 / 42.5; // d log(frac1)/d phi_ge
    const double d2 = -e2 / den2 / 44.1;
    out.d_phi_ge_mv = out.value * (d1 + d2);
    out.d_nernst_k_mv = out.value * (e1 / den1 / 42.5);
    out.d_conc_k_ecs = out.value * 0.5 / conc_k_ecs;
    return out;
}

NakclCurrent nakcl_current(double g_nakcl, const std::array<double, kNumIons>& conc_g,
                           const std::array<double, kNumIons>& conc_e) {
    for (int k = 0; k < kNumIons; ++k)
        if (!(conc_g[k] > 0.0) || !(conc_e[k] > 0.0))
            throw InvalidArgument("nakcl current needs positive concentrations");
    NakclCurrent out;
    const double arg = (conc_g[kNa] * conc_g[kK] * conc_g[kCl] * conc_g[kCl]) /
                       (conc_e[kNa] * conc_e[kK] * conc_e[kCl] * conc_e[kCl]);
    out.value = g_nakcl * std::log(arg);
    out.d_conc_g[kNa] = g_nakcl / conc_g[kNa];
    out.d_conc_g[kK] = g_nakcl / conc_g[kK];
    out.d_conc_g[kCl] = 2.0 * g_nakcl / conc_g[kCl];
    out.d_conc_e[kNa] = -g_nakcl / conc_e[kNa];
    out.d_conc_e[kK] = -g_nakcl / conc_e[kK];
    out.d_conc_e[kCl] = -2.0 * g_nakcl / conc_e[kCl];
    return out;
}

double excitatory_conductance(const TriggerParams& trigger, double x, double t) {
    if (trigger.g_max == 0.0 || x > trigger.l_ex || t > trigger.t_ex || t < 0.0)
        return 0.0;
    const double pi = M_PI;
    const double cx = std::cos(pi * x / (2.0 * trigger.l_ex));
    return trigger.g_max * cx * cx * std::sin(pi * t / trigger.t_ex);
}

namespace {

struct IonAccumulator {
    MembraneFluxSet* out;
    const ModelSpec* spec;
    bool partials;

    // Adds a current I (A/m^2) with partials wrt (phi_r, phi_R, conc_r[kc_r],
    // conc_R[kc_R]) to ion k's passive flux.
    void add_passive(int k, double current, double d_phi_rR = 0.0,
                     int kc_r = -1, double d_cr = 0.0,
                     int kc_R = -1, double d_cR = 0.0) {
        const double s = 1.0 / (spec->constants.faraday * spec->ions[k].valence);
        out->passive[k] += s * current;
        if (!partials)
            return;
        auto& d = out->d_passive[k];
        d[0] += s * d_phi_rR;
        d[1] -= s * d_phi_rR;
        if (kc_r >= 0)
            d[2 + kc_r] += s * d_cr;
        if (kc_R >= 0)
            d[5 + kc_R] += s * d_cR;
    }
};

} // namespace

MembraneFluxSet membrane_fluxes(const ModelSpec& spec, int r,
                                double phi_r, double phi_R,
                                const double* conc_r, const double* conc_R,
                                const double* gates, double x, double t,
                                bool want_partials) {
    MembraneFluxSet out;
    const CompartmentParams& cp = spec.compartments[r];
    if (cp.membrane == MembraneModel::None)
        return out;

    const PhysicalConstants& pc = spec.constants;
    const double F = pc.faraday;
    const double psi = pc.psi();
    const double phi_rR = phi_r - phi_R;
    IonAccumulator acc{&out, &spec, want_partials};

    // Nernst potentials and their concentration derivatives.
    double E[kNumIons], dE_cr[kNumIons], dE_cR[kNumIons];
    for (int k = 0; k < kNumIons; ++k) {
        const int z = spec.ions[k].valence;
        E[k] = nernst(pc, z, conc_r[k], conc_R[k]);
        dE_cr[k] = -psi / (z * conc_r[k]);
        dE_cR[k] = psi / (z * conc_R[k]);
    }

    auto add_leak = [&](int k, double g) {
        if (g == 0.0)
            return;
        acc.add_passive(k, g * (phi_rR - E[k]), g, k, -g * dE_cr[k], k, -g * dE_cR[k]);
    };

    const bool leaks_all = cp.membrane == MembraneModel::LeakOnly;
    const bool neuron = cp.membrane == MembraneModel::Neuron;
    const bool glial = cp.membrane == MembraneModel::Glial;
    const bool leak_kir = cp.membrane == MembraneModel::LeakKir;

    add_leak(kNa, cp.g_leak[kNa]);
    if (leaks_all || neuron)
        add_leak(kK, cp.g_leak[kK]);
    add_leak(kCl, cp.g_leak[kCl]);

    if (neuron) {
        const double m_nap = gates[kGateNapM], h_nap = gates[kGateNapH];
        const GhkCurrent nap =
            ghk_current(pc, cp.g_nap, m_nap * m_nap * h_nap, phi_rR, conc_r[kNa], conc_R[kNa]);
        acc.add_passive(kNa, nap.value, nap.d_phi, kNa, nap.d_conc_r, kNa, nap.d_conc_R);

        double kdr_gate = 1.0;
        for (int p = 0; p < cp.kdr_exponent; ++p)
            kdr_gate *= gates[kGateKdrM];
        const GhkCurrent kdr =
            ghk_current(pc, cp.g_kdr, kdr_gate, phi_rR, conc_r[kK], conc_R[kK]);
        acc.add_passive(kK, kdr.value, kdr.d_phi, kK, kdr.d_conc_r, kK, kdr.d_conc_R);

        const double m_ka = gates[kGateKaM], h_ka = gates[kGateKaH];
        const GhkCurrent ka =
            ghk_current(pc, cp.g_ka, m_ka * m_ka * h_ka, phi_rR, conc_r[kK], conc_R[kK]);
        acc.add_passive(kK, ka.value, ka.d_phi, kK, ka.d_conc_r, kK, ka.d_conc_R);
    }

    if (glial || leak_kir) {
        const double phi_mv = 1e3 * phi_rR;
        const double ek_mv = 1e3 * E[kK];
        const KirConductance kir = kir_conductance(cp.g_kir0, conc_R[kK], phi_mv, ek_mv);
        const double drive = phi_rR - E[kK];
        const double current = kir.value * drive;
        // chain: d/dphi picks up both the conductance and the driving force
        const double d_phi = 1e3 * kir.d_phi_ge_mv * drive + kir.value;
        const double d_cr = 1e3 * kir.d_nernst_k_mv * dE_cr[kK] * drive - kir.value * dE_cr[kK];
        const double d_cR = 1e3 * kir.d_nernst_k_mv * dE_cR[kK] * drive - kir.value * dE_cR[kK] +
                            kir.d_conc_k_ecs * drive;
        acc.add_passive(kK, current, d_phi, kK, d_cr, kK, d_cR);
    }

    if (glial) {
        std::array<double, kNumIons> cg{conc_r[0], conc_r[1], conc_r[2]};
        std::array<double, kNumIons> ce{conc_R[0], conc_R[1], conc_R[2]};
        const NakclCurrent nk = nakcl_current(cp.g_nakcl, cg, ce);
        // The cotransporter is electroneutral (1 Na + 1 K + 2 Cl), so its
        // "current" converts to molar fluxes through F alone; dividing the
        // Cl part by z_Cl = -1 would inject net charge and empty the glial
        // chloride pool within one wave passage.
        const int mult[kNumIons] = {1, 1, 2};
        for (int k = 0; k < kNumIons; ++k) {
            const double zeff = spec.ions[k].valence; // cancels add_passive's 1/(F z)
            acc.add_passive(k, zeff * mult[k] * nk.value);
            if (want_partials)
                for (int kk = 0; kk < kNumIons; ++kk)
                    acc.add_passive(k, 0.0, 0.0, kk, zeff * mult[k] * nk.d_conc_g[kk],
                                    kk, zeff * mult[k] * nk.d_conc_e[kk]);
        }
    }

    if (neuron || glial) {
        const double g_ex = excitatory_conductance(spec.trigger, x, t);
        if (g_ex != 0.0) {
            const double sign = spec.trigger_literal_sign ? -1.0 : 1.0;
            for (int k = 0; k < kNumIons; ++k)
                acc.add_passive(k, sign * g_ex * (phi_rR - E[k]), sign * g_ex,
                                k, -sign * g_ex * dE_cr[k], k, -sign * g_ex * dE_cR[k]);
        }

        const PumpCurrent pump =
            pump_current(cp.pump_max, cp.pump_m_k, cp.pump_m_na, conc_R[kK], conc_r[kNa]);
        out.active[kNa] += 3.0 * pump.value / (F * spec.ions[kNa].valence);
        out.active[kK] += -2.0 * pump.value / (F * spec.ions[kK].valence);
    }

    return out;
}

std::array<double, kNumGates> gating_steady_state(double phi_mv, bool ka_literal) {
    std::array<double, kNumGates> g{};
    const ChannelRates nap = gating_rates(Channel::NaP, phi_mv, ka_literal);
    const ChannelRates kdr = gating_rates(Channel::KDR, phi_mv, ka_literal);
    const ChannelRates ka = gating_rates(Channel::KA, phi_mv, ka_literal);
    g[kGateNapM] = nap.m.alpha / (nap.m.alpha + nap.m.beta);
    g[kGateNapH] = nap.h.alpha / (nap.h.alpha + nap.h.beta);
    g[kGateKdrM] = kdr.m.alpha / (kdr.m.alpha + kdr.m.beta);
    g[kGateKaM] = ka.m.alpha / (ka.m.alpha + ka.m.beta);
    g[kGateKaH] = ka.h.alpha / (ka.h.alpha + ka.h.beta);
    return g;
}

} // namespace neurodiffuse
