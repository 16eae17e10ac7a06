#include "solve/ode_stepper.hpp"

#include <cmath>

#include "core/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace neurodiffuse {

const char* ode_stepper_name(OdeStepperKind k) {
    switch (k) {
    case OdeStepperKind::BE: return "be";
    case OdeStepperKind::RK4: return "rk4";
    case OdeStepperKind::ESDIRK4: return "esdirk4";
    }
    return "?";
}

OdeStepperKind ode_stepper_from_name(const std::string& name) {
    if (name == "be") return OdeStepperKind::BE;
    if (name == "rk4") return OdeStepperKind::RK4;
    if (name == "esdirk4") return OdeStepperKind::ESDIRK4;
    throw InvalidArgument("unknown ode stepper '" + name + "'");
}

const ButcherTableau& ButcherTableau::rk4() {
    static const ButcherTableau t = [] {
        ButcherTableau b;
        b.stages = 4;
        b.a[1][0] = 0.5;
        b.a[2][1] = 0.5;
        b.a[3][2] = 1.0;
        b.b = {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6, 0, 0};
        b.c = {0, 0.5, 0.5, 1.0, 0, 0};
        b.stiffly_accurate = false;
        return b;
    }();
    return t;
}

const ButcherTableau& ButcherTableau::esdirk4() {
    static const ButcherTableau t = [] {
        ButcherTableau b;
        b.stages = 6;
        const double g = 0.25;
        b.a[1][0] = g;
        b.a[1][1] = g;
        b.a[2][0] = 8611.0 / 62500.0;
        b.a[2][1] = -1743.0 / 31250.0;
        b.a[2][2] = g;
        b.a[3][0] = 5012029.0 / 34652500.0;
        b.a[3][1] = -654441.0 / 2922500.0;
        b.a[3][2] = 174375.0 / 388108.0;
        b.a[3][3] = g;
        b.a[4][0] = 15267082809.0 / 155376265600.0;
        b.a[4][1] = -71443401.0 / 120774400.0;
        b.a[4][2] = 730878875.0 / 902184768.0;
        b.a[4][3] = 2285395.0 / 8070912.0;
        b.a[4][4] = g;
        b.a[5][0] = 82889.0 / 524892.0;
        b.a[5][1] = 0.0;
        b.a[5][2] = 15625.0 / 83664.0;
        b.a[5][3] = 69875.0 / 102672.0;
        b.a[5][4] = -2260.0 / 8211.0;
        b.a[5][5] = g;
        for (int j = 0; j < 6; ++j)
            b.b[j] = b.a[5][j];
        for (int i = 0; i < 6; ++i) {
            double s = 0.0;
            for (int j = 0; j <= i; ++j)
                s += b.a[i][j];
            b.c[i] = s;
        }
        b.stiffly_accurate = true;
        return b;
    }();
    return t;
}

namespace {

// Scalar damped Newton for z - base - w f_i(t, z) = 0.
double implicit_component(const GatingOde& sys, int i, double t, double base, double w,
                          double z0, int dof_index, double dt) {
    const double tol = 1e-12;
    double z = z0;
    double g = z - base - w * sys.rhs_component(i, t, z);
    for (int it = 0; it < 50; ++it) {
        if (std::abs(g) <= tol * std::max(1.0, std::abs(z)))
            return z;
        const double gp = 1.0 - w * sys.jac_component(i);
        if (gp == 0.0 || !std::isfinite(gp))
            break;
        const double step = g / gp;
        double damp = 1.0;
        for (int half = 0; half < 30; ++half) {
            const double zn = z - damp * step;
            const double gn = zn - base - w * sys.rhs_component(i, t, zn);
            if (std::abs(gn) < std::abs(g) || std::abs(gn) <= tol) {
                z = zn;
                g = gn;
                break;
            }
            damp *= 0.5;
            if (half == 29)
                throw StepperDivergence("damped newton stalled", dof_index, dt);
        }
    }
    if (std::abs(g) <= tol * std::max(1.0, std::abs(z)))
        return z;
    throw StepperDivergence("newton failed to converge", dof_index, dt);
}

void check_gate_bounds(const GatingOde& sys, const double* y, int dof_index, double dt) {
    if (!sys.check_bounds)
        return;
    for (int i = 0; i < sys.dim; ++i) {
        if (!std::isfinite(y[i]) || y[i] < -1e-12 || y[i] > 1.0 + 1e-12)
            throw StepperDivergence("gating variable left [0,1]", dof_index, dt);
    }
}

} // namespace

void ode_step(OdeStepperKind kind, const GatingOde& sys, double t0, double dt,
              double* y, int dof_index) {
    const int n = sys.dim;
    switch (kind) {
    case OdeStepperKind::BE: {
        const double t1 = t0 + dt;
        for (int i = 0; i < n; ++i)
            y[i] = implicit_component(sys, i, t1, y[i], dt, y[i], dof_index, dt);
        break;
    }
    case OdeStepperKind::RK4: {
        const ButcherTableau& tb = ButcherTableau::rk4();
        double k[4][kNumGates];
        double stage[kNumGates];
        for (int s = 0; s < 4; ++s) {
            const double ts = t0 + tb.c[s] * dt;
            for (int i = 0; i < n; ++i) {
                double acc = y[i];
                for (int j = 0; j < s; ++j)
                    acc += dt * tb.a[s][j] * k[j][i];
                stage[i] = acc;
            }
            for (int i = 0; i < n; ++i)
                k[s][i] = sys.rhs_component(i, ts, stage[i]);
        }
        for (int i = 0; i < n; ++i)
            y[i] += dt * (tb.b[0] * k[0][i] + tb.b[1] * k[1][i] + tb.b[2] * k[2][i] +
                          tb.b[3] * k[3][i]);
        break;
    }
    case OdeStepperKind::ESDIRK4: {
        const ButcherTableau& tb = ButcherTableau::esdirk4();
        const double g = tb.a[1][1];
        double k[6][kNumGates];
        for (int i = 0; i < n; ++i)
            k[0][i] = sys.rhs_component(i, t0, y[i]);
        for (int s = 1; s < tb.stages; ++s) {
            const double ts = t0 + tb.c[s] * dt;
            for (int i = 0; i < n; ++i) {
                double base = y[i];
                for (int j = 0; j < s; ++j)
                    base += dt * tb.a[s][j] * k[j][i];
                const double z = implicit_component(sys, i, ts, base, dt * g, y[i],
                                                    dof_index, dt);
                k[s][i] = sys.rhs_component(i, ts, z);
            }
        }
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int s = 0; s < tb.stages; ++s)
                acc += tb.b[s] * k[s][i];
            y[i] += dt * acc;
        }
        break;
    }
    }
    check_gate_bounds(sys, y, dof_index, dt);
}

GatingOde GatingDynamics::make(double x, double phi_ne) const {
    GatingOde sys;
    sys.dim = dim;
    sys.x = x;
    sys.phi = phi_ne;
    if (physio) {
        sys.check_bounds = true;
        const double phi_mv = 1e3 * phi_ne;
        const ChannelRates nap = gating_rates(Channel::NaP, phi_mv, ka_literal);
        const ChannelRates kdr = gating_rates(Channel::KDR, phi_mv, ka_literal);
        const ChannelRates ka = gating_rates(Channel::KA, phi_mv, ka_literal);
        sys.alpha[kGateNapM] = nap.m.alpha;
        sys.beta[kGateNapM] = nap.m.beta;
        sys.alpha[kGateNapH] = nap.h.alpha;
        sys.beta[kGateNapH] = nap.h.beta;
        sys.alpha[kGateKdrM] = kdr.m.alpha;
        sys.beta[kGateKdrM] = kdr.m.beta;
        sys.alpha[kGateKaM] = ka.m.alpha;
        sys.beta[kGateKaM] = ka.m.beta;
        sys.alpha[kGateKaH] = ka.h.alpha;
        sys.beta[kGateKaH] = ka.h.beta;
    } else {
        sys.check_bounds = false;
        sys.source = source;
    }
    return sys;
}

void batch_step(OdeStepperKind kind, const GatingDynamics& dyn,
                const std::vector<double>& phi_ne, double t0, double dt,
                GatingField& gates, bool parallel) {
    const int n = gates.n_dofs();
    if (static_cast<int>(phi_ne.size()) != n)
        throw InvalidArgument("phi_ne and gating field sizes differ");

    std::exception_ptr failure = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int d = 0; d < n; ++d) {
        if (failure)
            continue;
        try {
            const GatingOde sys = dyn.make(gates.dofmap->dof_coord(d), phi_ne[d]);
            ode_step(kind, sys, t0, dt, gates.at(d), d);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!failure)
                failure = std::current_exception();
        }
    }
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace neurodiffuse
