#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "synlat/hamiltonian.hpp"

namespace synlat {

enum class Boundary { Open, Periodic };
enum class DriveType { Static, Bichromatic, Escher };

struct Drive {
  DriveType type = DriveType::Static;
  double detuning_mhz = 0.0;
};

/// Coupling between adjacent labels with <to|H|from> = (rabi/2) e^{i phase}.
/// The wraparound link of a ring runs from the largest label to the smallest.
struct Link {
  int from = 0;
  int to = 1;
  double rabi_mhz = 0.0;
  double phase_rad = 0.0;
};

/// Declarative synthetic lattice: sites, couplings, on-site potentials,
/// boundary condition and drive scheme.
struct LatticeSpec {
  std::vector<int> sites;
  std::vector<Link> links;
  /// One entry per site, same order as `sites`; empty means all zero.
  std::vector<double> site_detunings_mhz;
  Boundary boundary = Boundary::Open;
  Drive drive;

  /// Throws SpecError when an invariant is violated.
  void validate() const;
  /// Reduces every link phase into [0, 2 pi).
  void normalize_phases();
  /// Sum of link phases around the ring (oriented from low to high label and
  /// through the wraparound link). Zero for open chains.
  double flux() const;
  /// Pointer into `links`, or nullptr.
  const Link* wrap_link() const;
  Link* wrap_link();
  double detuning_of(int site) const;

  /// Open chain jmin..jmax, uniform rabi rate, potential j * tilt.
  static LatticeSpec chain(int jmin, int jmax, double rabi_mhz, double tilt_mhz = 0.0);
  /// Ring jmin..jmax with a wraparound link; the drive decides how the tilt
  /// enters (static rings are flat).
  static LatticeSpec ring(int jmin, int jmax, double rabi_mhz, Drive drive = {}, double wrap_phase_rad = 0.0);
  /// Open chain under symmetric two-tone driving.
  static LatticeSpec bichromatic_chain(int jmin, int jmax, double rabi_mhz, double detuning_mhz);
};

/// Dipolar exchange coefficients C3 (MHz um^3) keyed by unordered state pair.
class C3Table {
 public:
  C3Table() = default;
  static C3Table load_csv(const std::filesystem::path& path);
  /// Table shipped with the project (overridable with SYNLAT_C3_TABLE).
  static C3Table load_default();
  static std::filesystem::path default_path();

  void set(int i, int j, double c3);
  /// 0 for pairs absent from the table.
  double lookup(int i, int j) const;
  bool contains(int i, int j) const;
  const std::map<std::pair<int, int>, double>& entries() const { return entries_; }

 private:
  static std::pair<int, int> key(int i, int j) { return i < j ? std::pair{i, j} : std::pair{j, i}; }
  std::map<std::pair<int, int>, double> entries_;
};

/// Base interaction V = V_{0,-1} and the table that scales it to every pair.
struct InteractionSpec {
  std::optional<double> v_mhz;
  /// When set (and v_mhz is not), V = C3(0,-1) / d^3.
  std::optional<double> separation_um;
  C3Table c3_table;
  std::string c3_table_path;

  static InteractionSpec with_default_table(double v_mhz);

  double base_interaction_mhz() const;
  /// V_ij = V * C3(i,j) / C3(0,-1), zero for pairs not in the table.
  double coupling(int i, int j) const;
};

/// Bare-energy description of a lab-frame two-tone drive.
struct LabFrameSpec {
  std::vector<double> bare_energies_mhz;
  double rabi_mhz = 0.0;
  double detuning_mhz = 0.0;
  int first_site = 0;

  /// omega_j = eps_{j+1} - eps_j
  std::vector<double> transition_frequencies_mhz() const;
};

HamiltonianMatrix build_single_hamiltonian(const LatticeSpec& spec);
HamiltonianMatrix build_pair_hamiltonian(const LatticeSpec& spec, const InteractionSpec& inter);
/// Lifts any single-particle generator to the pair space:
/// H (x) I + I (x) H + H_int, time-dependent terms lifted the same way.
HamiltonianMatrix build_pair_hamiltonian(const HamiltonianMatrix& single, const InteractionSpec& inter);
/// Exchange block <j,i|H|i,j> = V_ij over the pair basis of `sites`.
CMatrix interaction_matrix(const std::vector<int>& sites, const InteractionSpec& inter);
HamiltonianMatrix build_lab_frame_hamiltonian(const LabFrameSpec& spec, std::size_t n_sites);
/// Interaction-picture form of a bichromatic drive:
/// H(t) = cos(2 pi Delta t) * sum_links rabi e^{i phi} (|to><from| + h.c.).
HamiltonianMatrix rotating_frame_reduce(const LatticeSpec& spec);
HamiltonianMatrix rotating_frame_reduce(const LatticeSpec& spec, const InteractionSpec& inter);

}  // namespace synlat
