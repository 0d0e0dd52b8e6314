#include "ncbem/formulations.hpp"

#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

#include "ncbem/quadrature.hpp"

namespace ncbem {

namespace {
using Clock = std::chrono::steady_clock;
}

std::string to_string(FormulationKind kind) {
  switch (kind) {
    case FormulationKind::pmchwt_ext: return "pmchwt_ext";
    case FormulationKind::pmchwt_int: return "pmchwt_int";
    case FormulationKind::muller_ext: return "muller_ext";
    case FormulationKind::muller_int: return "muller_int";
    case FormulationKind::mtf: return "mtf";
    case FormulationKind::hc_ext_neu: return "hc_ext_neu";
    case FormulationKind::hc_ext_dir: return "hc_ext_dir";
    case FormulationKind::hc_int_neu: return "hc_int_neu";
    case FormulationKind::hc_int_dir: return "hc_int_dir";
  }
  throw std::invalid_argument("to_string: unknown formulation");
}

FormulationKind formulation_from_string(const std::string& name) {
  for (FormulationKind kind : all_formulations()) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown formulation: " + name);
}

const std::vector<FormulationKind>& all_formulations() {
  static const std::vector<FormulationKind> kinds = {
      FormulationKind::pmchwt_ext, FormulationKind::pmchwt_int, FormulationKind::muller_ext,
      FormulationKind::muller_int, FormulationKind::mtf,        FormulationKind::hc_ext_neu,
      FormulationKind::hc_ext_dir, FormulationKind::hc_int_neu, FormulationKind::hc_int_dir,
  };
  return kinds;
}

IncidentField IncidentField::plane_wave(const Vec3& direction) {
  const double n = direction.norm();
  if (n < 1e-14) throw std::invalid_argument("plane_wave: zero direction");
  return IncidentField(Kind::plane_wave, direction / n);
}

IncidentField IncidentField::point_source(const Vec3& location) {
  return IncidentField(Kind::point_source, location);
}

Complex IncidentField::value(Complex k, const Vec3& x) const {
  if (kind_ == Kind::plane_wave) {
    return std::exp(imag_unit * k * data_.dot(x));
  }
  return green(k, x, data_);
}

Vec3c IncidentField::gradient(Complex k, const Vec3& x) const {
  if (kind_ == Kind::plane_wave) {
    return (imag_unit * k * std::exp(imag_unit * k * data_.dot(x))) * data_.cast<Complex>();
  }
  const Vec3 d = x - data_;
  const double r = d.norm();
  if (r == 0.0) throw std::invalid_argument("point_source: gradient at the source");
  const Complex g = std::exp(imag_unit * k * r) / (4.0 * M_PI * r);
  return (g * (imag_unit * k - 1.0 / r) / r) * d.cast<Complex>();
}

std::pair<VecXc, VecXc> incident_traces(const IncidentField& incident, Complex k,
                                        const P1Space& space) {
  const Mesh& mesh = space.mesh();
  if (incident.kind() == IncidentField::Kind::point_source) {
    if (distance_to_surface(mesh, incident.data()) < 1e-10 * mesh.bbox_diagonal()) {
      throw std::invalid_argument("incident_traces: point source lies on the surface");
    }
  }
  static const TriangleRule rule = composite_rule(triangle_rule(4), 1);
  VecXc dirichlet = VecXc::Zero(space.dof_count());
  VecXc neumann = VecXc::Zero(space.dof_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Vec3 a = mesh.corner(t, 0), b = mesh.corner(t, 1), c = mesh.corner(t, 2);
    const Vec3 n = mesh.triangle_normal(t);
    const double jac = 2.0 * mesh.triangle_area(t);
    const auto& tri = mesh.triangles[t];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec3& bary = rule.points[q];
      const Vec3 x = bary[0] * a + bary[1] * b + bary[2] * c;
      const double w = rule.weights[q] * jac;
      const Complex val = incident.value(k, x) * w;
      const Vec3c grad = incident.gradient(k, x);
      const Complex dn = (grad[0] * n[0] + grad[1] * n[1] + grad[2] * n[2]) * w;
      for (int i = 0; i < 3; ++i) {
        const int dof = space.dof_of_vertex(tri[i]);
        if (dof < 0) continue;
        dirichlet[dof] += val * bary[i];
        neumann[dof] += dn * bary[i];
      }
    }
  }
  return {dirichlet, neumann};
}

TransmissionContext::TransmissionContext(const TransmissionProblem& problem,
                                         const AssemblyOptions& options)
    : problem_(problem), options_(options) {
  if (!problem_.mesh_ext || !problem_.mesh_int) {
    throw std::invalid_argument("TransmissionContext: missing meshes");
  }
  if (problem_.frequency <= 0.0) {
    throw std::invalid_argument("TransmissionContext: frequency must be positive");
  }
  conforming_ = (problem_.mesh_ext == problem_.mesh_int);
  k_ext_ = Wavenumber::from_frequency(problem_.frequency, problem_.medium_ext).k;
  k_int_ = Wavenumber::from_frequency(problem_.frequency, problem_.medium_int).k;
  space_ext_storage_ = std::make_unique<P1Space>(*problem_.mesh_ext);
  space_ext_ = space_ext_storage_.get();
  if (conforming_) {
    space_int_ = space_ext_;
  } else {
    space_int_storage_ = std::make_unique<P1Space>(*problem_.mesh_int);
    space_int_ = space_int_storage_.get();
  }
}

std::shared_ptr<const SparseMatrix> TransmissionContext::mass_ext() {
  if (!mass_ext_) {
    const auto t0 = Clock::now();
    mass_ext_ = std::make_shared<SparseMatrix>(assemble_mass(*space_ext_));
    assembly_seconds_ += std::chrono::duration<double>(Clock::now() - t0).count();
  }
  return mass_ext_;
}

std::shared_ptr<const SparseMatrix> TransmissionContext::mass_int() {
  if (conforming_) return mass_ext();
  if (!mass_int_) {
    const auto t0 = Clock::now();
    mass_int_ = std::make_shared<SparseMatrix>(assemble_mass(*space_int_));
    assembly_seconds_ += std::chrono::duration<double>(Clock::now() - t0).count();
  }
  return mass_int_;
}

std::shared_ptr<const MassInverse> TransmissionContext::mass_inv_ext() {
  if (!mass_inv_ext_) mass_inv_ext_ = std::make_shared<MassInverse>(*mass_ext());
  return mass_inv_ext_;
}

std::shared_ptr<const MassInverse> TransmissionContext::mass_inv_int() {
  if (conforming_) return mass_inv_ext();
  if (!mass_inv_int_) mass_inv_int_ = std::make_shared<MassInverse>(*mass_int());
  return mass_inv_int_;
}

std::shared_ptr<const SparseMatrix> TransmissionContext::mortar() {
  if (conforming_) return mass_ext();
  if (!mortar_) {
    const auto t0 = Clock::now();
    MortarMatrix m = assemble_mortar(*problem_.mesh_int, *problem_.mesh_ext);
    mortar_ = std::make_shared<SparseMatrix>(std::move(m.matrix));
    assembly_seconds_ += std::chrono::duration<double>(Clock::now() - t0).count();
  }
  return mortar_;
}

void TransmissionContext::ensure(Side side, const std::vector<OperatorKind>& kinds) {
  std::vector<OperatorKind> missing;
  for (OperatorKind kind : kinds) {
    const auto key = std::make_pair(static_cast<int>(side), static_cast<int>(kind));
    if (!dense_cache_.count(key)) missing.push_back(kind);
  }
  if (missing.empty()) return;
  const P1Space& space = side == Side::ext ? *space_ext_ : *space_int_;
  const Complex k = side == Side::ext ? k_ext_ : k_int_;
  const auto t0 = Clock::now();
  auto ops = assemble_operators(missing, space, space, k, options_);
  assembly_seconds_ += std::chrono::duration<double>(Clock::now() - t0).count();
  for (auto& [op_kind, op] : ops) {
    const auto op_key = std::make_pair(static_cast<int>(side), static_cast<int>(op_kind));
    dense_cache_[op_key] = std::make_shared<MatXc>(std::move(op.matrix));
  }
}

std::shared_ptr<const MatXc> TransmissionContext::dense(Side side, OperatorKind kind) {
  ensure(side, {kind});
  return dense_cache_.at(std::make_pair(static_cast<int>(side), static_cast<int>(kind)));
}

VecXc TransmissionContext::transfer_to_int(const VecXc& ext_coeffs) {
  if (conforming_) return ext_coeffs;
  const VecX re = ext_coeffs.real(), im = ext_coeffs.imag();
  const SparseMatrix& p = *mortar();
  return mass_inv_int()->apply(VecXc(p * re) + imag_unit * VecXc(p * im));
}

VecXc TransmissionContext::transfer_to_ext(const VecXc& int_coeffs) {
  if (conforming_) return int_coeffs;
  const VecX re = int_coeffs.real(), im = int_coeffs.imag();
  const SparseMatrix& p = *mortar();
  return mass_inv_ext()->apply(VecXc(p.transpose() * re) + imag_unit * VecXc(p.transpose() * im));
}

double TransmissionContext::take_assembly_seconds() {
  const double s = assembly_seconds_;
  assembly_seconds_ = 0.0;
  return s;
}

namespace {

using Side = TransmissionContext::Side;
constexpr OperatorKind kSL = OperatorKind::single_layer;
constexpr OperatorKind kDL = OperatorKind::double_layer;
constexpr OperatorKind kAD = OperatorKind::adjoint_double_layer;
constexpr OperatorKind kHS = OperatorKind::hypersingular;

// Assembles the block grid and right-hand side of one formulation from the
// context's cached factors.
class SystemBuilder {
 public:
  explicit SystemBuilder(TransmissionContext& ctx) : ctx_(ctx) {
    ne_ = ctx.space_ext().dof_count();
    ni_ = ctx.space_int().dof_count();
    re_ = ctx.rho_ext_over_int();
    ri_ = ctx.rho_int_over_ext();
  }

  DiscreteSystem build(FormulationKind kind) {
    prefetch(kind);
    DiscreteSystem sys;
    sys.kind = kind;
    switch (kind) {
      case FormulationKind::pmchwt_ext: build_single_trace_ext(sys, false); break;
      case FormulationKind::muller_ext: build_single_trace_ext(sys, true); break;
      case FormulationKind::pmchwt_int: build_single_trace_int(sys, false); break;
      case FormulationKind::muller_int: build_single_trace_int(sys, true); break;
      case FormulationKind::mtf: build_mtf(sys); break;
      case FormulationKind::hc_ext_neu: build_hc_ext_neu(sys); break;
      case FormulationKind::hc_ext_dir: build_hc_ext_dir(sys); break;
      case FormulationKind::hc_int_neu: build_hc_int_neu(sys); break;
      case FormulationKind::hc_int_dir: build_hc_int_dir(sys); break;
    }
    sys.dense_operator_count = static_cast<int>(used_.size());
    return sys;
  }

 private:
  void prefetch(FormulationKind kind) {
    switch (kind) {
      case FormulationKind::pmchwt_ext:
      case FormulationKind::muller_ext:
      case FormulationKind::pmchwt_int:
      case FormulationKind::muller_int:
      case FormulationKind::mtf:
        ctx_.ensure(Side::ext, {kSL, kDL, kAD, kHS});
        ctx_.ensure(Side::intr, {kSL, kDL, kAD, kHS});
        break;
      case FormulationKind::hc_ext_neu:
        ctx_.ensure(Side::ext, {kSL, kAD});
        ctx_.ensure(Side::intr, {kAD, kHS});
        break;
      case FormulationKind::hc_ext_dir:
        ctx_.ensure(Side::ext, {kDL, kHS});
        ctx_.ensure(Side::intr, {kSL, kDL});
        break;
      case FormulationKind::hc_int_neu:
        ctx_.ensure(Side::ext, {kAD, kHS});
        ctx_.ensure(Side::intr, {kSL, kAD});
        break;
      case FormulationKind::hc_int_dir:
        ctx_.ensure(Side::ext, {kSL, kDL});
        ctx_.ensure(Side::intr, {kDL, kHS});
        break;
    }
  }

  LinOp::Ptr dense(Side side, OperatorKind kind) {
    used_.insert({static_cast<int>(side), static_cast<int>(kind)});
    return dense_op(ctx_.dense(side, kind));
  }

  LinOp::Ptr minv_e() { return mass_inverse_op(ctx_.mass_inv_ext()); }
  LinOp::Ptr minv_i() { return mass_inverse_op(ctx_.mass_inv_int()); }
  LinOp::Ptr mass_e() { return sparse_op(ctx_.mass_ext()); }
  LinOp::Ptr mass_i() { return sparse_op(ctx_.mass_int()); }
  LinOp::Ptr p_int_ext() { return sparse_op(ctx_.mortar()); }
  LinOp::Ptr p_ext_int() { return sparse_transpose_op(ctx_.mortar()); }

  // hat towards the exterior mesh: P_ext,int Mi^-1 A_int Mi^-1 P_int,ext
  LinOp::Ptr hat_e(OperatorKind kind) {
    return product({p_ext_int(), minv_i(), dense(Side::intr, kind), minv_i(), p_int_ext()});
  }
  // hat towards the interior mesh: P_int,ext Me^-1 A_ext Me^-1 P_ext,int
  LinOp::Ptr hat_i(OperatorKind kind) {
    return product({p_int_ext(), minv_e(), dense(Side::ext, kind), minv_e(), p_ext_int()});
  }

  void ext_traces(VecXc& f, VecXc& g) {
    auto [fd, fn] = incident_traces(ctx_.problem().incident, ctx_.k_ext(), ctx_.space_ext());
    f = std::move(fd);
    g = std::move(fn);
  }

  // interior weak functional of the function with exterior weak vector w
  VecXc transfer_weak_to_int(const VecXc& ext_weak) {
    const VecXc coeffs = ctx_.mass_inv_ext()->apply(ext_weak);
    const SparseMatrix& p = *ctx_.mortar();
    return VecXc(p * coeffs.real()) + imag_unit * VecXc(p * coeffs.imag());
  }

  // exterior weak functional of the function with interior coefficients c
  VecXc weaken_to_ext(const VecXc& int_coeffs) {
    const SparseMatrix& p = *ctx_.mortar();
    return VecXc(p.transpose() * int_coeffs.real()) +
           imag_unit * VecXc(p.transpose() * int_coeffs.imag());
  }

  VecXc apply_dense(Side side, OperatorKind kind, const VecXc& coeffs) {
    used_.insert({static_cast<int>(side), static_cast<int>(kind)});
    return (*ctx_.dense(side, kind)) * coeffs;
  }

  // PMCHWT: C_ext + hat(scaled C_int); Muller: I + C_ext - hat(scaled C_int)
  void build_single_trace_ext(DiscreteSystem& sys, bool muller) {
    const double sgn = muller ? -1.0 : 1.0;
    std::vector<LinOp::Ptr> a11 = {scaled(-1.0, dense(Side::ext, kDL)), scaled(-sgn, hat_e(kDL))};
    std::vector<LinOp::Ptr> a22 = {dense(Side::ext, kAD), scaled(sgn, hat_e(kAD))};
    if (muller) {
      a11.push_back(mass_e());
      a22.push_back(mass_e());
    }
    LinOp::Ptr a12 = sum({dense(Side::ext, kSL), scaled(sgn * ri_, hat_e(kSL))});
    LinOp::Ptr a21 = sum({dense(Side::ext, kHS), scaled(sgn * re_, hat_e(kHS))});
    sys.op = block_op({{sum(a11), a12}, {a21, sum(a22)}});
    VecXc f, g;
    ext_traces(f, g);
    sys.rhs = VecXc(2 * ne_);
    sys.rhs << f, g;
    sys.block_offsets = {0, ne_, 2 * ne_};
  }

  void build_single_trace_int(DiscreteSystem& sys, bool muller) {
    const double sgn = muller ? -1.0 : 1.0;
    std::vector<LinOp::Ptr> a11 = {scaled(-1.0, hat_i(kDL)), scaled(-sgn, dense(Side::intr, kDL))};
    std::vector<LinOp::Ptr> a22 = {hat_i(kAD), scaled(sgn, dense(Side::intr, kAD))};
    if (muller) {
      a11.push_back(mass_i());
      a22.push_back(mass_i());
    }
    LinOp::Ptr a12 = sum({scaled(re_, hat_i(kSL)), scaled(sgn, dense(Side::intr, kSL))});
    LinOp::Ptr a21 = sum({scaled(ri_, hat_i(kHS)), scaled(sgn, dense(Side::intr, kHS))});
    sys.op = block_op({{sum(a11), a12}, {a21, sum(a22)}});
    VecXc f, g;
    ext_traces(f, g);
    sys.rhs = VecXc(2 * ni_);
    sys.rhs << transfer_weak_to_int(f), ri_ * transfer_weak_to_int(g);
    sys.block_offsets = {0, ni_, 2 * ni_};
  }

  // Couplings carry the signs imposed by the transmission conditions
  // -T_ext phi_ext = T_int phi_int: the two trace pairs remain negatives of
  // each other, so the interior representation stays directly usable.
  void build_mtf(DiscreteSystem& sys) {
    LinOp::Ptr none = nullptr;
    sys.op = block_op({
        {scaled(-1.0, dense(Side::ext, kDL)), dense(Side::ext, kSL), scaled(-0.5, p_ext_int()), none},
        {dense(Side::ext, kHS), dense(Side::ext, kAD), none, scaled(-0.5 * re_, p_ext_int())},
        {scaled(0.5, p_int_ext()), none, scaled(-1.0, dense(Side::intr, kDL)), dense(Side::intr, kSL)},
        {none, scaled(0.5 * ri_, p_int_ext()), dense(Side::intr, kHS), dense(Side::intr, kAD)},
    });
    VecXc f, g;
    ext_traces(f, g);
    sys.rhs = VecXc::Zero(2 * ne_ + 2 * ni_);
    sys.rhs.segment(0, ne_) = -f;
    sys.rhs.segment(ne_, ne_) = -g;
    sys.block_offsets = {0, ne_, 2 * ne_, 2 * ne_ + ni_, 2 * ne_ + 2 * ni_};
  }

  void build_hc_ext_neu(DiscreteSystem& sys) {
    LinOp::Ptr a11 = sum({scaled(0.5, mass_e()), scaled(-1.0, hat_e(kAD))});
    LinOp::Ptr a12 = scaled(-re_, product({p_ext_int(), minv_i(), dense(Side::intr, kHS), minv_i(),
                                           p_int_ext(), minv_e(), dense(Side::ext, kSL)}));
    LinOp::Ptr a21 = mass_e();
    LinOp::Ptr a22 = sum({scaled(0.5, mass_e()), scaled(-1.0, dense(Side::ext, kAD))});
    sys.op = block_op({{a11, a12}, {a21, a22}});

    VecXc f, g;
    ext_traces(f, g);
    const VecXc fd = ctx_.mass_inv_ext()->apply(f);
    const VecXc hs_weak = apply_dense(Side::intr, kHS, ctx_.transfer_to_int(fd));
    const VecXc row1 = re_ * weaken_to_ext(ctx_.mass_inv_int()->apply(hs_weak));
    sys.rhs = VecXc(2 * ne_);
    sys.rhs << row1, g;
    sys.block_offsets = {0, ne_, 2 * ne_};
  }

  void build_hc_ext_dir(DiscreteSystem& sys) {
    LinOp::Ptr a11 = sum({scaled(0.5, mass_e()), dense(Side::ext, kDL)});
    LinOp::Ptr a12 = mass_e();
    LinOp::Ptr a21 = scaled(-ri_, product({p_ext_int(), minv_i(), dense(Side::intr, kSL), minv_i(),
                                           p_int_ext(), minv_e(), dense(Side::ext, kHS)}));
    LinOp::Ptr a22 = sum({scaled(0.5, mass_e()), hat_e(kDL)});
    sys.op = block_op({{a11, a12}, {a21, a22}});

    VecXc f, g;
    ext_traces(f, g);
    const VecXc gn = ctx_.mass_inv_ext()->apply(g);
    const VecXc sl_weak = apply_dense(Side::intr, kSL, ctx_.transfer_to_int(gn));
    const VecXc row2 = ri_ * weaken_to_ext(ctx_.mass_inv_int()->apply(sl_weak));
    sys.rhs = VecXc(2 * ne_);
    sys.rhs << f, row2;
    sys.block_offsets = {0, ne_, 2 * ne_};
  }

  void build_hc_int_neu(DiscreteSystem& sys) {
    LinOp::Ptr a11 = sum({scaled(0.5, mass_i()), hat_i(kAD)});
    LinOp::Ptr a12 = scaled(ri_, product({p_int_ext(), minv_e(), dense(Side::ext, kHS), minv_e(),
                                          p_ext_int(), minv_i(), dense(Side::intr, kSL)}));
    LinOp::Ptr a21 = scaled(-1.0, mass_i());
    LinOp::Ptr a22 = sum({scaled(0.5, mass_i()), dense(Side::intr, kAD)});
    sys.op = block_op({{a11, a12}, {a21, a22}});

    VecXc f, g;
    ext_traces(f, g);
    const VecXc fd = ctx_.mass_inv_ext()->apply(f);
    const VecXc gn = ctx_.mass_inv_ext()->apply(g);
    const VecXc ext_weak =
        apply_dense(Side::ext, kHS, fd) + 0.5 * g + apply_dense(Side::ext, kAD, gn);
    sys.rhs = VecXc::Zero(2 * ni_);
    sys.rhs.segment(0, ni_) = ri_ * transfer_weak_to_int(ext_weak);
    sys.block_offsets = {0, ni_, 2 * ni_};
  }

  void build_hc_int_dir(DiscreteSystem& sys) {
    LinOp::Ptr a11 = sum({scaled(0.5, mass_i()), scaled(-1.0, dense(Side::intr, kDL))});
    LinOp::Ptr a12 = scaled(-1.0, mass_i());
    LinOp::Ptr a21 = scaled(re_, product({p_int_ext(), minv_e(), dense(Side::ext, kSL), minv_e(),
                                          p_ext_int(), minv_i(), dense(Side::intr, kHS)}));
    LinOp::Ptr a22 = sum({scaled(0.5, mass_i()), scaled(-1.0, hat_i(kDL))});
    sys.op = block_op({{a11, a12}, {a21, a22}});

    VecXc f, g;
    ext_traces(f, g);
    const VecXc fd = ctx_.mass_inv_ext()->apply(f);
    const VecXc gn = ctx_.mass_inv_ext()->apply(g);
    const VecXc ext_weak =
        apply_dense(Side::ext, kSL, gn) + 0.5 * f - apply_dense(Side::ext, kDL, fd);
    sys.rhs = VecXc::Zero(2 * ni_);
    sys.rhs.segment(ni_, ni_) = transfer_weak_to_int(ext_weak);
    sys.block_offsets = {0, ni_, 2 * ni_};
  }

  TransmissionContext& ctx_;
  Eigen::Index ne_ = 0, ni_ = 0;
  double re_ = 1.0, ri_ = 1.0;
  std::set<std::pair<int, int>> used_;
};

}  // namespace

DiscreteSystem build_system(FormulationKind kind, TransmissionContext& ctx) {
  SystemBuilder builder(ctx);
  DiscreteSystem sys = builder.build(kind);
  const bool high_contrast =
      kind == FormulationKind::hc_ext_neu || kind == FormulationKind::hc_ext_dir ||
      kind == FormulationKind::hc_int_neu || kind == FormulationKind::hc_int_dir;
  const int expected = high_contrast ? 4 : 8;
  if (sys.dense_operator_count != expected) {
    throw std::logic_error("build_system: dense operator count mismatch for " + to_string(kind));
  }
  return sys;
}

DiscreteSystem precondition_strong(const DiscreteSystem& system, TransmissionContext& ctx) {
  if (system.strong) throw std::invalid_argument("precondition_strong: system is already strong");
  std::vector<LinOp::Ptr> diag;
  switch (system.kind) {
    case FormulationKind::pmchwt_ext:
    case FormulationKind::muller_ext:
    case FormulationKind::hc_ext_neu:
    case FormulationKind::hc_ext_dir:
      diag = {mass_inverse_op(ctx.mass_inv_ext()), mass_inverse_op(ctx.mass_inv_ext())};
      break;
    case FormulationKind::pmchwt_int:
    case FormulationKind::muller_int:
    case FormulationKind::hc_int_neu:
    case FormulationKind::hc_int_dir:
      diag = {mass_inverse_op(ctx.mass_inv_int()), mass_inverse_op(ctx.mass_inv_int())};
      break;
    case FormulationKind::mtf:
      diag = {mass_inverse_op(ctx.mass_inv_ext()), mass_inverse_op(ctx.mass_inv_ext()),
              mass_inverse_op(ctx.mass_inv_int()), mass_inverse_op(ctx.mass_inv_int())};
      break;
  }

  std::vector<std::vector<LinOp::Ptr>> grid(diag.size(), std::vector<LinOp::Ptr>(diag.size()));
  for (std::size_t i = 0; i < diag.size(); ++i) grid[i][i] = diag[i];
  LinOp::Ptr pre = block_op(std::move(grid));

  DiscreteSystem out = system;
  out.strong = true;
  out.op = product({pre, system.op});
  out.rhs = pre->apply(system.rhs);
  return out;
}

}  // namespace ncbem
