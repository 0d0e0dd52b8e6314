// Discrete block systems and right-hand sides for the nine transmission
// formulations, on conforming or nonconforming mesh pairs. Cross-mesh
// compositions insert inverse mass matrices following the hat transform
//   hat(A_int) = P_ext,int M_int^-1 A_int M_int^-1 P_int,ext,
// and analogously towards the interior mesh.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "ncbem/linop.hpp"
#include "ncbem/mortar.hpp"
#include "ncbem/operators.hpp"
#include "ncbem/space.hpp"

namespace ncbem {

enum class FormulationKind {
  pmchwt_ext,
  pmchwt_int,
  muller_ext,
  muller_int,
  mtf,
  hc_ext_neu,
  hc_ext_dir,
  hc_int_neu,
  hc_int_dir,
};

std::string to_string(FormulationKind kind);
FormulationKind formulation_from_string(const std::string& name);
const std::vector<FormulationKind>& all_formulations();

class IncidentField {
 public:
  enum class Kind { plane_wave, point_source };

  static IncidentField plane_wave(const Vec3& direction);
  static IncidentField point_source(const Vec3& location);

  Kind kind() const { return kind_; }
  const Vec3& data() const { return data_; }

  Complex value(Complex k, const Vec3& x) const;
  Vec3c gradient(Complex k, const Vec3& x) const;

 private:
  IncidentField(Kind kind, const Vec3& data) : kind_(kind), data_(data) {}
  Kind kind_;
  Vec3 data_;
};

// Weak-form Dirichlet and Neumann trace vectors of the incident field,
//   f_i = <p_inc, hat_i>,   g_i = <grad p_inc . n, hat_i>.
std::pair<VecXc, VecXc> incident_traces(const IncidentField& incident, Complex k,
                                        const P1Space& space);

struct TransmissionProblem {
  const Mesh* mesh_ext = nullptr;
  const Mesh* mesh_int = nullptr;  // may alias mesh_ext for conforming runs
  MediumParams medium_ext;
  MediumParams medium_int;
  double frequency = 1.0;
  IncidentField incident = IncidentField::plane_wave(Vec3::UnitX());
};

struct DiscreteSystem {
  FormulationKind kind;
  LinOp::Ptr op;
  VecXc rhs;
  bool strong = false;
  int dense_operator_count = 0;                // distinct dense BIOs referenced
  std::vector<Eigen::Index> block_offsets;     // unknown-block layout
};

// Caches spaces, mass matrices, the mortar matrix, and dense operators for
// one transmission problem, so that several formulations can be built and
// evaluated against each other cheaply.
class TransmissionContext {
 public:
  TransmissionContext(const TransmissionProblem& problem, const AssemblyOptions& options = {});

  const TransmissionProblem& problem() const { return problem_; }
  bool conforming() const { return conforming_; }
  Complex k_ext() const { return k_ext_; }
  Complex k_int() const { return k_int_; }
  double rho_ext_over_int() const { return problem_.medium_ext.rho / problem_.medium_int.rho; }
  double rho_int_over_ext() const { return problem_.medium_int.rho / problem_.medium_ext.rho; }

  const P1Space& space_ext() const { return *space_ext_; }
  const P1Space& space_int() const { return *space_int_; }

  std::shared_ptr<const SparseMatrix> mass_ext();
  std::shared_ptr<const SparseMatrix> mass_int();
  std::shared_ptr<const MassInverse> mass_inv_ext();
  std::shared_ptr<const MassInverse> mass_inv_int();
  // P_int,ext (rows on the interior mesh); the exterior mass matrix when
  // conforming
  std::shared_ptr<const SparseMatrix> mortar();

  enum class Side { ext, intr };
  // Assembles any missing operators of the side in one masked sweep.
  void ensure(Side side, const std::vector<OperatorKind>& kinds);
  std::shared_ptr<const MatXc> dense(Side side, OperatorKind kind);

  // coefficient-level transfers through the mortar projection
  VecXc transfer_to_int(const VecXc& ext_coeffs);
  VecXc transfer_to_ext(const VecXc& int_coeffs);

  // seconds spent in dense/mortar/mass assembly since the last call
  double take_assembly_seconds();
  void clear_dense_cache() { dense_cache_.clear(); }

  const AssemblyOptions& assembly_options() const { return options_; }

 private:
  TransmissionProblem problem_;
  AssemblyOptions options_;
  bool conforming_;
  Complex k_ext_, k_int_;
  std::unique_ptr<P1Space> space_ext_storage_;
  std::unique_ptr<P1Space> space_int_storage_;
  const P1Space* space_ext_;
  const P1Space* space_int_;
  std::shared_ptr<const SparseMatrix> mass_ext_, mass_int_, mortar_;
  std::shared_ptr<const MassInverse> mass_inv_ext_, mass_inv_int_;
  std::map<std::pair<int, int>, std::shared_ptr<const MatXc>> dense_cache_;
  double assembly_seconds_ = 0.0;
};

// Weak-form block system per the discrete formulation equations.
DiscreteSystem build_system(FormulationKind kind, TransmissionContext& ctx);

// Mass-matrix left preconditioning: block-diagonal M^-1 on every test block.
DiscreteSystem precondition_strong(const DiscreteSystem& system, TransmissionContext& ctx);

}  // namespace ncbem
