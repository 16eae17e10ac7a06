#include "solve/coupled_system.hpp"

#include <cmath>
#include <cstring>
#include <exception>

#include "core/errors.hpp"
#include "model/membrane.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace neurodiffuse {

namespace {
constexpr int kMaxFields = 16;
constexpr int kMaxComps = 3;
constexpr int kMaxLocal = 2 * kMaxFields + 2; // field-major cell dofs
} // namespace

CoupledSystem::CoupledSystem(const ModelSpec& spec, const Mesh1D& mesh, ElementPairing pairing)
    : spec_(&spec), layout_(spec, mesh, pairing) {
    if (layout_.n_fields() > kMaxFields)
        throw InvalidArgument("too many fields for the coupled kernel");
}

BandedMatrix CoupledSystem::make_matrix() const {
    const int bw = bandwidth();
    return BandedMatrix(n_dofs(), bw, bw);
}

std::vector<RowConstraint> CoupledSystem::boundary_constraints(const ForcingSet& forcing,
                                                               double t) const {
    std::vector<RowConstraint> rows;
    const SystemLayout& sys = layout_.system();
    const Mesh1D& mesh = layout_.mesh();
    const int nv = mesh.num_cells; // last vertex index
    for (int f = 0; f < layout_.n_fields(); ++f) {
        if (!forcing.dirichlet_field(f))
            continue;
        if (!family_has_vertex_dofs(sys.field(f).family))
            continue;
        rows.push_back({sys.global_index(f, 0), forcing.dirichlet_value(f, 0.0, t)});
        rows.push_back({sys.global_index(f, nv), forcing.dirichlet_value(f, mesh.length, t)});
    }
    return rows;
}

std::vector<RowConstraint> CoupledSystem::nullspace_pins(double phi_ecs_left,
                                                         double pressure_left) const {
    std::vector<RowConstraint> rows;
    const SystemLayout& sys = layout_.system();
    rows.push_back({sys.global_index(layout_.phi_field(spec_->ecs()), 0), phi_ecs_left});
    if (layout_.has_pressure())
        rows.push_back({sys.global_index(layout_.pressure_field(), 0), pressure_left});
    return rows;
}

void CoupledSystem::apply_constraints(const std::vector<RowConstraint>& rows,
                                      const std::vector<double>& u,
                                      std::vector<double>& residual, BandedMatrix* jac) const {
    for (const RowConstraint& rc : rows) {
        residual[rc.global_dof] = u[rc.global_dof] - rc.value;
        if (jac)
            jac->set_unit_row(rc.global_dof);
    }
}

struct CoupledSystem::CellScratch {
    // basis tables [family][qp][i]
    double n_scalar[4][3], dn_scalar[4][3];
    double n_alpha[4][3], dn_alpha[4][3];
    int nd_scalar = 0, nd_alpha = 0;

    double local_u[kMaxLocal], local_un[kMaxLocal], local_unm1[kMaxLocal];
    double local_gates[3 * kNumGates];
    int global[kMaxLocal];

    double val[kMaxFields], grad[kMaxFields];
    double val_n[kMaxFields], grad_n[kMaxFields];
    double val_nm1[kMaxFields];
    double gates_qp[kNumGates];

    double A[kMaxFields], B[kMaxFields];
    double dAdv[kMaxFields * kMaxFields];
    double dBdv[kMaxFields * kMaxFields], dBdg[kMaxFields * kMaxFields];

    double local_res[kMaxLocal];
    double local_jac[kMaxLocal * kMaxLocal];
};

void CoupledSystem::assemble_cells(const StepContext& ctx, const std::vector<double>& u,
                                   int cell_begin, int cell_end, double* residual, int res_row0,
                                   double* band, int band_col0, const BandedMatrix* shape) const {
    const SystemLayout& sys = layout_.system();
    const Mesh1D& mesh = layout_.mesh();
    const Quadrature& quad = Quadrature::gauss4();
    const int nf = layout_.n_fields();
    const double h = mesh.h();
    const bool want_jac = band != nullptr;
    const int kl = shape ? shape->kl() : 0;
    const int ku = shape ? shape->ku() : 0;
    const int ldab = shape ? shape->ldab() : 0;

    CellScratch s;
    s.nd_scalar = family_dofs_per_cell(layout_.scalar_family());
    s.nd_alpha = family_dofs_per_cell(layout_.alpha_family());
    for (int q = 0; q < Quadrature::n_points; ++q) {
        family_basis(layout_.scalar_family(), quad.points[q], s.n_scalar[q], s.dn_scalar[q]);
        family_basis(layout_.alpha_family(), quad.points[q], s.n_alpha[q], s.dn_alpha[q]);
    }

    const int L = sys.local_size();
    const DofMap& gmap = layout_.scalar_dofmap();
    int gate_dofs[3];
    const int n_gates = ctx.gates ? std::min(ctx.gates->n_gates, kNumGates) : 0;
    std::memset(s.gates_qp, 0, sizeof(s.gates_qp));

    for (int c = cell_begin; c < cell_end; ++c) {
        sys.cell_global_dofs(c, s.global);
        for (int i = 0; i < L; ++i) {
            const int g = s.global[i];
            s.local_u[i] = u[g];
            s.local_un[i] = (*ctx.u_n)[g];
            s.local_unm1[i] = ctx.weights.need_nm1() ? (*ctx.u_nm1)[g] : 0.0;
        }
        if (ctx.gates) {
            gmap.cell_dofs(c, gate_dofs);
            for (int i = 0; i < s.nd_scalar; ++i)
                for (int g = 0; g < n_gates; ++g)
                    s.local_gates[i * kNumGates + g] = ctx.gates->at(gate_dofs[i])[g];
        }

        std::memset(s.local_res, 0, sizeof(double) * L);
        if (want_jac)
            std::memset(s.local_jac, 0, sizeof(double) * L * L);

        for (int q = 0; q < Quadrature::n_points; ++q) {
            const double x = mesh.cell_left(c) + quad.points[q] * h;
            const double wdx = quad.weights[q] * h;

            // field values and gradients at the quadrature point
            for (int f = 0; f < nf; ++f) {
                const bool is_alpha = f >= layout_.alpha_field(0) &&
                                      (!layout_.has_pressure() || f != layout_.pressure_field());
                const double* nb = is_alpha ? s.n_alpha[q] : s.n_scalar[q];
                const double* db = is_alpha ? s.dn_alpha[q] : s.dn_scalar[q];
                const int nd = is_alpha ? s.nd_alpha : s.nd_scalar;
                const int off = sys.field_local_offset(f);
                double v = 0, g = 0, vn = 0, gn = 0, vm = 0;
                for (int i = 0; i < nd; ++i) {
                    v += nb[i] * s.local_u[off + i];
                    g += db[i] * s.local_u[off + i];
                    vn += nb[i] * s.local_un[off + i];
                    gn += db[i] * s.local_un[off + i];
                    vm += nb[i] * s.local_unm1[off + i];
                }
                s.val[f] = v;
                s.grad[f] = g / h;
                s.val_n[f] = vn;
                s.grad_n[f] = gn / h;
                s.val_nm1[f] = vm;
            }
            if (ctx.gates) {
                for (int g = 0; g < n_gates; ++g) {
                    double v = 0;
                    for (int i = 0; i < s.nd_scalar; ++i)
                        v += s.n_scalar[q][i] * s.local_gates[i * kNumGates + g];
                    s.gates_qp[g] = v;
                }
            }

            point_kernel(ctx, c, x, s.val, s.grad, s.val_n, s.grad_n, s.val_nm1,
                         s.gates_qp, s.A, s.B, s.dAdv, s.dBdv, s.dBdg, want_jac);

            for (int e = 0; e < nf; ++e)
                if (!std::isfinite(s.A[e]) || !std::isfinite(s.B[e]))
                    throw AssemblyFailure(c);

            // local residual: rows grouped by equation's test space
            for (int e = 0; e < nf; ++e) {
                const bool e_alpha = e >= layout_.alpha_field(0) &&
                                     (!layout_.has_pressure() || e != layout_.pressure_field());
                const double* nb = e_alpha ? s.n_alpha[q] : s.n_scalar[q];
                const double* db = e_alpha ? s.dn_alpha[q] : s.dn_scalar[q];
                const int nd = e_alpha ? s.nd_alpha : s.nd_scalar;
                const int off = sys.field_local_offset(e);
                for (int i = 0; i < nd; ++i)
                    s.local_res[off + i] += wdx * (s.A[e] * nb[i] + s.B[e] * db[i] / h);
                if (!want_jac)
                    continue;
                for (int f = 0; f < nf; ++f) {
                    const double dav = s.dAdv[e * nf + f];
                    const double dbv = s.dBdv[e * nf + f];
                    const double dbg = s.dBdg[e * nf + f];
                    if (dav == 0.0 && dbv == 0.0 && dbg == 0.0)
                        continue;
                    const bool f_alpha = f >= layout_.alpha_field(0) &&
                                         (!layout_.has_pressure() || f != layout_.pressure_field());
                    const double* nbf = f_alpha ? s.n_alpha[q] : s.n_scalar[q];
                    const double* dbf = f_alpha ? s.dn_alpha[q] : s.dn_scalar[q];
                    const int ndf = f_alpha ? s.nd_alpha : s.nd_scalar;
                    const int offf = sys.field_local_offset(f);
                    for (int i = 0; i < nd; ++i) {
                        const double wi = wdx * nb[i];
                        const double wgi = wdx * db[i] / h;
                        double* row = s.local_jac + (off + i) * L + offf;
                        for (int j = 0; j < ndf; ++j) {
                            const double nj = nbf[j];
                            const double gj = dbf[j] / h;
                            row[j] += wi * dav * nj + wgi * (dbv * nj + dbg * gj);
                        }
                    }
                }
            }
        }

        // scatter
        for (int i = 0; i < L; ++i)
            residual[s.global[i] - res_row0] += s.local_res[i];
        if (want_jac) {
            for (int j = 0; j < L; ++j) {
                const int gj = s.global[j];
                double* col = band + static_cast<std::size_t>(gj - band_col0) * ldab;
                for (int i = 0; i < L; ++i) {
                    const double v = s.local_jac[i * L + j];
                    if (v != 0.0)
                        col[kl + ku + s.global[i] - gj] += v;
                }
            }
        }
    }
}

void CoupledSystem::assemble(const StepContext& ctx, const std::vector<double>& u,
                             std::vector<double>& residual, BandedMatrix* jac,
                             bool parallel) const {
    const int n = n_dofs();
    residual.assign(n, 0.0);
    if (jac)
        jac->zero();
    const int nc = layout_.mesh().num_cells;

    int threads = 1;
#ifdef _OPENMP
    if (parallel)
        threads = std::min(omp_get_max_threads(), std::max(1, nc / 64));
#endif

    if (threads <= 1) {
        assemble_cells(ctx, u, 0, nc, residual.data(), 0, jac ? jac->data() : nullptr, 0, jac);
        return;
    }

#ifdef _OPENMP
    // Per-thread strips over contiguous cell ranges, merged in cell order so
    // the sums are bitwise identical to the serial path (any global entry
    // receives at most two cell contributions in 1D).
    const SystemLayout& sys = layout_.system();
    const int L = sys.local_size();
    struct Strip {
        int cell0, cell1;
        int row0, row1; // global dof range (inclusive)
        std::vector<double> res;
        std::vector<double> band;
    };
    std::vector<Strip> strips(threads);
    std::vector<int> scratch(L);
    for (int t = 0; t < threads; ++t) {
        Strip& st = strips[t];
        st.cell0 = nc * t / threads;
        st.cell1 = nc * (t + 1) / threads;
        int lo = n, hi = -1;
        for (int c : {st.cell0, st.cell1 - 1}) {
            sys.cell_global_dofs(c, scratch.data());
            for (int i = 0; i < L; ++i) {
                lo = std::min(lo, scratch[i]);
                hi = std::max(hi, scratch[i]);
            }
        }
        st.row0 = lo;
        st.row1 = hi;
        st.res.assign(hi - lo + 1, 0.0);
        if (jac)
            st.band.assign(static_cast<std::size_t>(hi - lo + 1) * jac->ldab(), 0.0);
    }

    std::exception_ptr failure = nullptr;
#pragma omp parallel num_threads(threads)
    {
        const int t = omp_get_thread_num();
        Strip& st = strips[t];
        try {
            assemble_cells(ctx, u, st.cell0, st.cell1, st.res.data(), st.row0,
                           jac ? st.band.data() : nullptr, st.row0, jac);
        } catch (...) {
#pragma omp critical
            if (!failure)
                failure = std::current_exception();
        }
    }
    if (failure)
        std::rethrow_exception(failure);

    for (Strip& st : strips) {
        for (int r = st.row0; r <= st.row1; ++r)
            residual[r] += st.res[r - st.row0];
        if (jac) {
            const int ldab = jac->ldab();
            for (int col = st.row0; col <= st.row1; ++col) {
                double* dst = jac->data() + static_cast<std::size_t>(col) * ldab;
                const double* src = st.band.data() + static_cast<std::size_t>(col - st.row0) * ldab;
                for (int k = 0; k < ldab; ++k)
                    dst[k] += src[k];
            }
        }
    }
#endif
}

void CoupledSystem::point_kernel(const StepContext& ctx, int cell, double x,
                                 const double* val, const double* grad,
                                 const double* val_n, const double* grad_n,
                                 const double* val_nm1, const double* gates_qp,
                                 double* A, double* B, double* dAdv,
                                 double* dBdv, double* dBdg, bool want_jacobian) const {
    const ModelSpec& spec = *spec_;
    const int R = spec.n_comps();
    const int K = spec.n_ions();
    const int ecs = spec.ecs();
    const int nf = layout_.n_fields();
    const double F = spec.constants.faraday;
    const double psi = spec.constants.psi();
    const double rt = spec.constants.rt();
    const SchemeWeights& w = ctx.weights;
    const double dt = ctx.dt;
    const double t_new = ctx.t_new;
    const double t_old = ctx.t_new - dt;
    const bool full = !spec.zero_flow;

    auto cF = [&](int r, int k) { return layout_.conc_field(r, k); };
    auto pF = [&](int r) { return layout_.phi_field(r); };
    auto aF = [&](int r) { return layout_.alpha_field(r); };
    const int prF = layout_.has_pressure() ? layout_.pressure_field() : -1;

    std::memset(A, 0, sizeof(double) * nf);
    std::memset(B, 0, sizeof(double) * nf);
    if (want_jacobian) {
        std::memset(dAdv, 0, sizeof(double) * nf * nf);
        std::memset(dBdv, 0, sizeof(double) * nf * nf);
        std::memset(dBdg, 0, sizeof(double) * nf * nf);
    }
    auto DAV = [&](int e, int f) -> double& { return dAdv[e * nf + f]; };
    auto DBV = [&](int e, int f) -> double& { return dBdv[e * nf + f]; };
    auto DBG = [&](int e, int f) -> double& { return dBdg[e * nf + f]; };

    // --- volume fractions for the three state levels ---
    auto alphas = [&](const double* v, double* a) {
        double ae = 1.0;
        for (int r = 0; r < R - 1; ++r) {
            a[r] = v[aF(r)];
            ae -= a[r];
        }
        a[ecs] = ae;
    };
    double alpha[kMaxComps], alpha_n[kMaxComps], alpha_nm1[kMaxComps];
    alphas(val, alpha);
    alphas(val_n, alpha_n);
    if (w.need_nm1())
        alphas(val_nm1, alpha_nm1);
    for (int r = 0; r < R; ++r)
        if (!(alpha[r] > 1e-9))
            throw DegenerateState("volume fraction collapsed in cell " + std::to_string(cell));

    // --- mass terms ---
    for (int r = 0; r < R; ++r) {
        for (int k = 0; k < K; ++k) {
            const int e = cF(r, k);
            const double m_new = alpha[r] * val[e];
            const double m_n = alpha_n[r] * val_n[e];
            const double m_nm1 = w.need_nm1() ? alpha_nm1[r] * val_nm1[e] : 0.0;
            A[e] += (w.mass_new * m_new + w.mass_n * m_n + w.mass_nm1 * m_nm1) / dt;
            if (want_jacobian) {
                DAV(e, e) += w.mass_new / dt * alpha[r];
                if (r < ecs)
                    DAV(e, aF(r)) += w.mass_new / dt * val[e];
                else
                    for (int q = 0; q < R - 1; ++q)
                        DAV(e, aF(q)) -= w.mass_new / dt * val[e];
            }
        }
    }
    for (int r = 0; r < R - 1; ++r) {
        const int e = aF(r);
        A[e] += (w.mass_new * alpha[r] + w.mass_n * alpha_n[r] +
                 w.mass_nm1 * (w.need_nm1() ? alpha_nm1[r] : 0.0)) / dt;
        if (want_jacobian)
            DAV(e, e) += w.mass_new / dt;
    }

    // --- flux and source terms at one state ---
    struct Velo {
        double u = 0.0;
        double d_gp = 0.0;   // wrt grad p_R
        double d_ga[kMaxComps] = {0, 0, 0}; // wrt grad alpha_q
        double d_a[kMaxComps] = {0, 0, 0};  // wrt alpha_q
        double d_c[kNumIons] = {0, 0, 0};   // wrt own conc
        double d_gphi = 0.0; // wrt grad phi_r
    };

    auto add_fluxes = [&](const double* v, const double* g, const double* a,
                          double t, double coef, bool partials, bool is_new) {
        double ga[kMaxComps];
        double ga_e = 0.0;
        for (int r = 0; r < R - 1; ++r) {
            ga[r] = g[aF(r)];
            ga_e -= ga[r];
        }
        ga[ecs] = ga_e;

        // compartmental velocities (full model)
        Velo vel[kMaxComps];
        if (full) {
            const double gp = g[prF];
            for (int r = 0; r < R; ++r) {
                const CompartmentParams& cp = spec.compartments[r];
                Velo& vr = vel[r];
                if (cp.kappa == 0.0)
                    continue;
                double charge = 0.0;
                for (int k = 0; k < K; ++k)
                    charge += spec.ions[k].valence * v[cF(r, k)];
                const double ar = a[r];
                const double onc = rt * cp.immobile / (ar * ar);
                double gptilde = gp + onc * ga[r];
                if (r < ecs)
                    gptilde += cp.stiffness * ga[r];
                vr.u = -cp.kappa * (gptilde + F * charge * g[pF(r)]);
                if (!partials)
                    continue;
                vr.d_gp = -cp.kappa;
                if (r < ecs) {
                    vr.d_ga[r] = -cp.kappa * (cp.stiffness + onc);
                    vr.d_a[r] = -cp.kappa * (-2.0 * rt * cp.immobile / (ar * ar * ar)) * ga[r];
                } else {
                    for (int q = 0; q < R - 1; ++q) {
                        vr.d_ga[q] = cp.kappa * onc;
                        vr.d_a[q] = cp.kappa * (-2.0 * rt * cp.immobile / (ar * ar * ar)) * ga[r];
                    }
                }
                for (int k = 0; k < K; ++k)
                    vr.d_c[k] = -cp.kappa * F * spec.ions[k].valence * g[pF(r)];
                vr.d_gphi = -cp.kappa * F * charge;
            }
        }

        // compartment fluxes J_r^k
        for (int r = 0; r < R; ++r) {
            const double chi = (r == ecs) ? 1.0 : spec.compartments[r].chi;
            for (int k = 0; k < K; ++k) {
                const int e = cF(r, k);
                const double dfree = spec.ions[k].free_diffusion;
                const double D = a[r] * chi * dfree;
                const double z = spec.ions[k].valence;
                const double conc = v[e];
                const double gc = g[e];
                const double gphi = g[pF(r)];
                double flux = -D * gc - D * z / psi * conc * gphi;
                if (full)
                    flux += a[r] * vel[r].u * conc;
                B[e] -= coef * flux;
                if (!partials)
                    continue;
                DBG(e, e) -= coef * (-D);
                double d_conc = -D * z / psi * gphi;
                if (full)
                    d_conc += a[r] * vel[r].u;
                DBV(e, e) -= coef * d_conc;
                double d_gphi = -D * z / psi * conc;
                if (full)
                    d_gphi += a[r] * conc * vel[r].d_gphi;
                DBG(e, pF(r)) -= coef * d_gphi;
                // alpha dependence of D (and of alpha_r u_r c)
                const double dD_kernel = chi * dfree * (-gc - z / psi * conc * gphi);
                for (int q = 0; q < R - 1; ++q) {
                    const double dar = (r == ecs) ? -1.0 : (q == r ? 1.0 : 0.0);
                    double d = dar * dD_kernel;
                    if (full)
                        d += dar * vel[r].u * conc + a[r] * conc * vel[r].d_a[q];
                    if (d != 0.0)
                        DBV(e, aF(q)) -= coef * d;
                }
                if (full && spec.compartments[r].kappa != 0.0) {
                    // advective coupling through the velocity
                    DBG(e, prF) -= coef * a[r] * conc * vel[r].d_gp;
                    for (int q = 0; q < R - 1; ++q)
                        if (vel[r].d_ga[q] != 0.0)
                            DBG(e, aF(q)) -= coef * a[r] * conc * vel[r].d_ga[q];
                    for (int kk = 0; kk < K; ++kk)
                        if (vel[r].d_c[kk] != 0.0)
                            DBV(e, cF(r, kk)) -= coef * a[r] * conc * vel[r].d_c[kk];
                }
            }
        }

        // membrane fluxes, water fluxes, advective alpha terms
        double conc_e[kNumIons];
        for (int k = 0; k < K; ++k)
            conc_e[k] = v[cF(ecs, k)];
        const CompartmentParams& ce = spec.compartments[ecs];

        for (int r = 0; r < R - 1; ++r) {
            const CompartmentParams& cp = spec.compartments[r];
            double conc_r[kNumIons];
            for (int k = 0; k < K; ++k)
                conc_r[k] = v[cF(r, k)];

            if (cp.membrane != MembraneModel::None && cp.gamma != 0.0) {
                const MembraneFluxSet mem =
                    membrane_fluxes(spec, r, v[pF(r)], v[pF(ecs)], conc_r, conc_e,
                                    gates_qp, x, t, partials);
                for (int k = 0; k < K; ++k) {
                    const double gj = cp.gamma * mem.passive[k];
                    A[cF(r, k)] += coef * gj;
                    A[cF(ecs, k)] -= coef * gj;
                    if (!partials)
                        continue;
                    const auto& d = mem.d_passive[k];
                    const int cols[8] = {pF(r), pF(ecs), cF(r, 0), cF(r, 1), cF(r, 2),
                                         cF(ecs, 0), cF(ecs, 1), cF(ecs, 2)};
                    for (int s = 0; s < 8; ++s) {
                        if (d[s] == 0.0)
                            continue;
                        DAV(cF(r, k), cols[s]) += coef * cp.gamma * d[s];
                        DAV(cF(ecs, k), cols[s]) -= coef * cp.gamma * d[s];
                    }
                }
            }

            // water flux into the alpha equations
            if (cp.gamma != 0.0 && cp.eta != 0.0) {
                const double tau = cp.stiffness * (a[r] - cp.alpha0);
                double osm = ce.immobile / a[ecs] - cp.immobile / a[r];
                for (int k = 0; k < K; ++k)
                    osm += conc_e[k] - conc_r[k];
                const double wflux = cp.eta * (tau / rt + osm);
                const int e = aF(r);
                A[e] += coef * cp.gamma * wflux;
                if (partials) {
                    const double gw = coef * cp.gamma * cp.eta;
                    for (int k = 0; k < K; ++k) {
                        DAV(e, cF(ecs, k)) += gw;
                        DAV(e, cF(r, k)) -= gw;
                    }
                    for (int q = 0; q < R - 1; ++q) {
                        double d = ce.immobile / (a[ecs] * a[ecs]); // via alpha_R
                        if (q == r)
                            d += cp.stiffness / rt + cp.immobile / (a[r] * a[r]);
                        DAV(e, aF(q)) += gw * d;
                    }
                }
            }

            // advective volume transport (full model)
            if (full) {
                const int e = aF(r);
                const Velo& vr = vel[r];
                B[e] -= coef * a[r] * vr.u;
                if (partials && spec.compartments[r].kappa != 0.0) {
                    DBV(e, aF(r)) -= coef * vr.u;
                    for (int q = 0; q < R - 1; ++q) {
                        if (vr.d_a[q] != 0.0)
                            DBV(e, aF(q)) -= coef * a[r] * vr.d_a[q];
                        if (vr.d_ga[q] != 0.0)
                            DBG(e, aF(q)) -= coef * a[r] * vr.d_ga[q];
                    }
                    DBG(e, prF) -= coef * a[r] * vr.d_gp;
                    for (int k = 0; k < K; ++k)
                        if (vr.d_c[k] != 0.0)
                            DBV(e, cF(r, k)) -= coef * a[r] * vr.d_c[k];
                    DBG(e, pF(r)) -= coef * a[r] * vr.d_gphi;
                }
            }
        }

        // divergence-free volume-weighted velocity (pressure row, full model)
        if (full && is_new) {
            const int e = prF;
            for (int r = 0; r < R; ++r) {
                const Velo& vr = vel[r];
                B[e] -= a[r] * vr.u;
                if (!partials || spec.compartments[r].kappa == 0.0)
                    continue;
                for (int q = 0; q < R - 1; ++q) {
                    const double dar = (r == ecs) ? -1.0 : (q == r ? 1.0 : 0.0);
                    double dv = dar * vr.u + a[r] * vr.d_a[q];
                    if (dv != 0.0)
                        DBV(e, aF(q)) -= dv;
                    if (vr.d_ga[q] != 0.0)
                        DBG(e, aF(q)) -= a[r] * vr.d_ga[q];
                }
                DBG(e, prF) -= a[r] * vr.d_gp;
                for (int k = 0; k < K; ++k)
                    if (vr.d_c[k] != 0.0)
                        DBV(e, cF(r, k)) -= a[r] * vr.d_c[k];
                DBG(e, pF(r)) -= a[r] * vr.d_gphi;
            }
        }
    };

    add_fluxes(val, grad, alpha, t_new, w.flux_new, want_jacobian, true);
    if (w.need_old_flux())
        add_fluxes(val_n, grad_n, alpha_n, t_old, w.flux_old, false, false);

    // active membrane part (pump) at the previous level
    for (int r = 0; r < R - 1; ++r) {
        const CompartmentParams& cp = spec.compartments[r];
        if (cp.membrane != MembraneModel::Neuron && cp.membrane != MembraneModel::Glial)
            continue;
        double conc_r[kNumIons], conc_e[kNumIons];
        for (int k = 0; k < K; ++k) {
            conc_r[k] = val_n[cF(r, k)];
            conc_e[k] = val_n[cF(ecs, k)];
        }
        const MembraneFluxSet mem = membrane_fluxes(spec, r, val_n[pF(r)], val_n[pF(ecs)],
                                                    conc_r, conc_e, gates_qp, x, t_old, false);
        for (int k = 0; k < K; ++k) {
            const double gj = cp.gamma * mem.active[k];
            A[cF(r, k)] += w.pump_old * gj;
            A[cF(ecs, k)] -= w.pump_old * gj;
        }
    }

    // forcing on the flux-type rows
    if (ctx.forcing) {
        for (int r = 0; r < R; ++r)
            for (int k = 0; k < K; ++k) {
                const int e = cF(r, k);
                A[e] -= w.force_new * ctx.forcing->force(e, x, t_new) +
                        w.force_old * ctx.forcing->force(e, x, t_old);
            }
        for (int r = 0; r < R - 1; ++r) {
            const int e = aF(r);
            A[e] -= w.force_new * ctx.forcing->force(e, x, t_new) +
                    w.force_old * ctx.forcing->force(e, x, t_old);
        }
        if (full)
            A[prF] -= ctx.forcing->force(prF, x, t_new);
    }

    // electroneutrality rows, enforced at the new level and scaled by 1/F to
    // keep their magnitude commensurate with the conservation rows
    const double sF = 1.0 / F;
    {
        double membrane_sum = 0.0;
        const double phi_e = val[pF(ecs)];
        for (int r = 0; r < R - 1; ++r) {
            const CompartmentParams& cp = spec.compartments[r];
            const int e = pF(r);
            double charge = 0.0;
            for (int k = 0; k < K; ++k)
                charge += spec.ions[k].valence * val[cF(r, k)];
            const double gc = cp.gamma * cp.capacitance;
            const double lhs = gc * (val[pF(r)] - phi_e);
            membrane_sum += lhs;
            double row = lhs - cp.immobile_valence * F * cp.immobile - alpha[r] * F * charge;
            if (ctx.forcing)
                row -= ctx.forcing->force(e, x, t_new);
            A[e] += sF * row;
            if (want_jacobian) {
                DAV(e, pF(r)) += sF * gc;
                DAV(e, pF(ecs)) -= sF * gc;
                for (int k = 0; k < K; ++k)
                    DAV(e, cF(r, k)) -= sF * alpha[r] * F * spec.ions[k].valence;
                DAV(e, aF(r)) -= sF * F * charge;
            }
        }
        const CompartmentParams& cee = spec.compartments[ecs];
        const int e = pF(ecs);
        double charge_e = 0.0;
        for (int k = 0; k < K; ++k)
            charge_e += spec.ions[k].valence * val[cF(ecs, k)];
        double row = -membrane_sum - cee.immobile_valence * F * cee.immobile -
                     alpha[ecs] * F * charge_e;
        if (ctx.forcing)
            row -= ctx.forcing->force(e, x, t_new);
        A[e] += sF * row;
        if (want_jacobian) {
            for (int r = 0; r < R - 1; ++r) {
                const double gc = spec.compartments[r].gamma * spec.compartments[r].capacitance;
                DAV(e, pF(r)) -= sF * gc;
                DAV(e, pF(ecs)) += sF * gc;
                DAV(e, aF(r)) += sF * F * charge_e;
            }
            for (int k = 0; k < K; ++k)
                DAV(e, cF(ecs, k)) -= sF * alpha[ecs] * F * spec.ions[k].valence;
        }
    }
}

} // namespace neurodiffuse
