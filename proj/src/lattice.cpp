#include "synlat/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "synlat/error.hpp"

#ifndef SYNLAT_DEFAULT_C3_TABLE
#define SYNLAT_DEFAULT_C3_TABLE "data/c3_table.csv"
#endif

namespace synlat {
namespace {

bool is_wrap(const LatticeSpec& spec, const Link& link) {
  if (spec.sites.size() < 3) return false;
  const int lo = spec.sites.front();
  const int hi = spec.sites.back();
  return (link.from == hi && link.to == lo) || (link.from == lo && link.to == hi);
}

/// (row, col, value) of the <to|H|from> element contributed by a link.
struct LinkElement {
  Eigen::Index row;
  Eigen::Index col;
  cplx value;
};

LinkElement element(const Basis& basis, const Link& link, double scale) {
  return {static_cast<Eigen::Index>(basis.site_index(link.to)),
          static_cast<Eigen::Index>(basis.site_index(link.from)),
          std::polar(scale * link.rabi_mhz, link.phase_rad)};
}

void add_hermitian(CMatrix& h, const LinkElement& e) {
  h(e.row, e.col) += e.value;
  h(e.col, e.row) += std::conj(e.value);
}

CMatrix kron_sum(const CMatrix& h) {
  const Eigen::Index n = h.rows();
  CMatrix out = CMatrix::Zero(n * n, n * n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      for (Eigen::Index k = 0; k < n; ++k) {
        // H (x) I : (a,b) <- (k,b) ; I (x) H : (a,b) <- (a,k)
        out(a * n + b, k * n + b) += h(a, k);
        out(a * n + b, a * n + k) += h(b, k);
      }
    }
  }
  return out;
}

Basis single_basis(const LatticeSpec& spec) { return Basis{BasisKind::Single, spec.sites}; }

}  // namespace

// ---------------------------------------------------------------------------
// LatticeSpec

void LatticeSpec::validate() const {
  if (sites.empty()) throw SpecError("lattice has no sites");
  for (std::size_t k = 1; k < sites.size(); ++k) {
    if (sites[k] != sites[k - 1] + 1) throw SpecError("site labels must be consecutive increasing integers");
  }
  if (!site_detunings_mhz.empty() && site_detunings_mhz.size() != sites.size()) {
    throw SpecError("site_detunings has " + std::to_string(site_detunings_mhz.size()) + " entries for " +
                    std::to_string(sites.size()) + " sites");
  }
  for (double d : site_detunings_mhz) {
    if (!std::isfinite(d)) throw SpecError("non-finite site detuning");
  }
  if (!std::isfinite(drive.detuning_mhz)) throw SpecError("non-finite drive detuning");

  std::set<std::pair<int, int>> seen;
  int wraps = 0;
  for (const auto& link : links) {
    auto in_sites = [&](int s) { return std::find(sites.begin(), sites.end(), s) != sites.end(); };
    if (!in_sites(link.from) || !in_sites(link.to)) {
      throw SpecError("link " + std::to_string(link.from) + "->" + std::to_string(link.to) +
                      " references an unknown site");
    }
    const bool wrap = is_wrap(*this, link);
    if (std::abs(link.from - link.to) != 1 && !wrap) {
      throw SpecError("link " + std::to_string(link.from) + "->" + std::to_string(link.to) +
                      " does not connect adjacent sites");
    }
    if (!(link.rabi_mhz >= 0.0) || !std::isfinite(link.rabi_mhz)) {
      throw SpecError("link " + std::to_string(link.from) + "->" + std::to_string(link.to) +
                      " has a negative or non-finite rabi rate");
    }
    if (!std::isfinite(link.phase_rad)) throw SpecError("non-finite link phase");
    const auto key = std::minmax(link.from, link.to);
    if (!seen.insert(key).second) {
      throw SpecError("duplicate link between " + std::to_string(key.first) + " and " + std::to_string(key.second));
    }
    wraps += wrap ? 1 : 0;
  }
  if (boundary == Boundary::Open && wraps != 0) throw SpecError("open boundary with a wraparound link");
  if (boundary == Boundary::Periodic && wraps != 1) throw SpecError("periodic boundary needs one wraparound link");
  if (drive.type == DriveType::Escher && boundary != Boundary::Periodic) {
    throw SpecError("escher drive requires a periodic boundary");
  }
  if (drive.type == DriveType::Bichromatic &&
      std::any_of(site_detunings_mhz.begin(), site_detunings_mhz.end(), [](double d) { return d != 0.0; })) {
    throw SpecError("bichromatic drive takes its detuning from the drive; site detunings must be zero");
  }
}

void LatticeSpec::normalize_phases() {
  for (auto& link : links) {
    double p = std::fmod(link.phase_rad, kTwoPi);
    if (p < 0.0) p += kTwoPi;
    if (p >= kTwoPi) p = 0.0;
    link.phase_rad = p;
  }
}

double LatticeSpec::flux() const {
  if (boundary != Boundary::Periodic) return 0.0;
  double total = 0.0;
  for (const auto& link : links) {
    if (is_wrap(*this, link)) {
      total += link.from == sites.back() ? link.phase_rad : -link.phase_rad;
    } else {
      total += link.to == link.from + 1 ? link.phase_rad : -link.phase_rad;
    }
  }
  return total;
}

const Link* LatticeSpec::wrap_link() const {
  for (const auto& link : links) {
    if (is_wrap(*this, link)) return &link;
  }
  return nullptr;
}

Link* LatticeSpec::wrap_link() {
  return const_cast<Link*>(static_cast<const LatticeSpec&>(*this).wrap_link());
}

double LatticeSpec::detuning_of(int site) const {
  if (site_detunings_mhz.empty()) return 0.0;
  return site_detunings_mhz.at(single_basis(*this).site_index(site));
}

LatticeSpec LatticeSpec::chain(int jmin, int jmax, double rabi_mhz, double tilt_mhz) {
  LatticeSpec spec;
  for (int j = jmin; j <= jmax; ++j) {
    spec.sites.push_back(j);
    spec.site_detunings_mhz.push_back(j * tilt_mhz);
    if (j < jmax) spec.links.push_back({j, j + 1, rabi_mhz, 0.0});
  }
  return spec;
}

LatticeSpec LatticeSpec::ring(int jmin, int jmax, double rabi_mhz, Drive drive, double wrap_phase_rad) {
  LatticeSpec spec = chain(jmin, jmax, rabi_mhz, 0.0);
  spec.links.push_back({jmax, jmin, rabi_mhz, wrap_phase_rad});
  spec.boundary = Boundary::Periodic;
  spec.drive = drive;
  spec.normalize_phases();
  return spec;
}

LatticeSpec LatticeSpec::bichromatic_chain(int jmin, int jmax, double rabi_mhz, double detuning_mhz) {
  LatticeSpec spec = chain(jmin, jmax, rabi_mhz, 0.0);
  spec.site_detunings_mhz.clear();
  spec.drive = {DriveType::Bichromatic, detuning_mhz};
  return spec;
}

// ---------------------------------------------------------------------------
// C3Table / InteractionSpec

C3Table C3Table::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open C3 table " + path.string());
  C3Table table;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != "i,j,c3_mhz_um3") {
        throw SpecError(path.string() + ":" + std::to_string(lineno) + ": expected header i,j,c3_mhz_um3");
      }
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    std::string fi, fj, fc;
    if (!std::getline(row, fi, ',') || !std::getline(row, fj, ',') || !std::getline(row, fc)) {
      throw SpecError(path.string() + ":" + std::to_string(lineno) + ": expected three columns");
    }
    try {
      std::size_t pi = 0, pj = 0, pc = 0;
      const int i = std::stoi(fi, &pi);
      const int j = std::stoi(fj, &pj);
      const double c = std::stod(fc, &pc);
      if (pi != fi.size() || pj != fj.size() || pc != fc.size() || i == j || !std::isfinite(c)) {
        throw std::invalid_argument("bad row");
      }
      if (table.contains(i, j)) throw SpecError(path.string() + ":" + std::to_string(lineno) + ": duplicate pair");
      table.set(i, j, c);
    } catch (const std::logic_error&) {
      throw SpecError(path.string() + ":" + std::to_string(lineno) + ": malformed row '" + line + "'");
    }
  }
  if (!header_seen) throw SpecError(path.string() + ": empty C3 table");
  return table;
}

std::filesystem::path C3Table::default_path() {
  if (const char* env = std::getenv("SYNLAT_C3_TABLE"); env && *env) return env;
  return SYNLAT_DEFAULT_C3_TABLE;
}

C3Table C3Table::load_default() { return load_csv(default_path()); }

void C3Table::set(int i, int j, double c3) { entries_[key(i, j)] = c3; }

double C3Table::lookup(int i, int j) const {
  auto it = entries_.find(key(i, j));
  return it == entries_.end() ? 0.0 : it->second;
}

bool C3Table::contains(int i, int j) const { return entries_.count(key(i, j)) != 0; }

InteractionSpec InteractionSpec::with_default_table(double v_mhz) {
  InteractionSpec inter;
  inter.v_mhz = v_mhz;
  inter.c3_table_path = C3Table::default_path().string();
  inter.c3_table = C3Table::load_csv(inter.c3_table_path);
  return inter;
}

double InteractionSpec::base_interaction_mhz() const {
  if (v_mhz) {
    if (!std::isfinite(*v_mhz)) throw SpecError("non-finite interaction strength");
    return *v_mhz;
  }
  if (separation_um) {
    if (!(*separation_um > 0.0)) throw SpecError("pair separation must be positive");
    const double d = *separation_um;
    return c3_table.lookup(0, -1) / (d * d * d);
  }
  throw SpecError("interaction needs v_mhz or separation_um");
}

double InteractionSpec::coupling(int i, int j) const {
  if (i == j) return 0.0;
  const double reference = c3_table.lookup(0, -1);
  if (reference == 0.0) throw SpecError("C3 table lacks the reference pair {0,-1}");
  return base_interaction_mhz() * c3_table.lookup(i, j) / reference;
}

std::vector<double> LabFrameSpec::transition_frequencies_mhz() const {
  std::vector<double> w;
  for (std::size_t j = 0; j + 1 < bare_energies_mhz.size(); ++j) {
    w.push_back(bare_energies_mhz[j + 1] - bare_energies_mhz[j]);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Builders

HamiltonianMatrix build_single_hamiltonian(const LatticeSpec& spec) {
  spec.validate();
  if (spec.drive.type == DriveType::Bichromatic) return rotating_frame_reduce(spec);

  const Basis basis = single_basis(spec);
  const auto n = static_cast<Eigen::Index>(basis.dim());
  CMatrix h = CMatrix::Zero(n, n);
  const bool escher = spec.drive.type == DriveType::Escher;
  for (Eigen::Index k = 0; k < n; ++k) {
    double diag = spec.site_detunings_mhz.empty() ? 0.0 : spec.site_detunings_mhz[k];
    if (escher) diag += spec.sites[k] * spec.drive.detuning_mhz;
    h(k, k) = diag;
  }

  std::vector<TimeDepTerm> terms;
  std::optional<double> period;
  for (const auto& link : spec.links) {
    const LinkElement e = element(basis, link, 0.5);
    if (escher && is_wrap(spec, link)) {
      // The tilt accumulated around the ring, N * Delta, cannot be gauged
      // away; it survives as exp(-i 2 pi N Delta t) on <j_max|H|j_min>.
      const Eigen::Index top = n - 1;
      const cplx w = e.row == top ? e.value : std::conj(e.value);
      CMatrix m = CMatrix::Zero(n, n);
      m(top, 0) = w;
      const double nu = static_cast<double>(n) * spec.drive.detuning_mhz;
      terms.push_back({std::move(m), Modulation::exponential(nu)});
      if (nu != 0.0) period = 1.0 / std::abs(nu);
    } else {
      add_hermitian(h, e);
    }
  }
  return HamiltonianMatrix(basis, std::move(h), std::move(terms), period);
}

HamiltonianMatrix rotating_frame_reduce(const LatticeSpec& spec) {
  spec.validate();
  if (spec.drive.type != DriveType::Bichromatic) {
    throw SpecError("rotating_frame_reduce needs a bichromatic drive");
  }
  const Basis basis = single_basis(spec);
  const auto n = static_cast<Eigen::Index>(basis.dim());
  CMatrix m = CMatrix::Zero(n, n);
  for (const auto& link : spec.links) {
    // two tones of rabi/2 each combine to rabi * cos(2 pi Delta t)
    const LinkElement e = element(basis, link, 1.0);
    m(e.row, e.col) += e.value;
  }
  const double delta = spec.drive.detuning_mhz;
  std::optional<double> period;
  if (delta != 0.0) period = 1.0 / std::abs(delta);
  std::vector<TimeDepTerm> terms;
  terms.push_back({std::move(m), Modulation::cosine(delta)});
  return HamiltonianMatrix(basis, CMatrix::Zero(n, n), std::move(terms), period);
}

HamiltonianMatrix rotating_frame_reduce(const LatticeSpec& spec, const InteractionSpec& inter) {
  return build_pair_hamiltonian(rotating_frame_reduce(spec), inter);
}

CMatrix interaction_matrix(const std::vector<int>& sites, const InteractionSpec& inter) {
  const auto n = static_cast<Eigen::Index>(sites.size());
  CMatrix h = CMatrix::Zero(n * n, n * n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      if (a == b) continue;
      // |i>_A |j>_B -> |j>_A |i>_B
      h(b * n + a, a * n + b) = inter.coupling(sites[a], sites[b]);
    }
  }
  return h;
}

HamiltonianMatrix build_pair_hamiltonian(const HamiltonianMatrix& single, const InteractionSpec& inter) {
  if (single.basis().kind != BasisKind::Single) {
    throw SpecError("build_pair_hamiltonian expects a single-particle generator");
  }
  Basis pair{BasisKind::Pair, single.basis().sites};
  const auto dim = static_cast<Eigen::Index>(pair.dim());
  CMatrix h = kron_sum(single.static_part()) + interaction_matrix(pair.sites, inter);
  if (h.rows() != dim) throw SpecError("pair basis size mismatch");
  std::vector<TimeDepTerm> terms;
  terms.reserve(single.terms().size());
  for (const auto& term : single.terms()) terms.push_back({kron_sum(term.matrix), term.modulation});
  return HamiltonianMatrix(std::move(pair), std::move(h), std::move(terms), single.period_us());
}

HamiltonianMatrix build_pair_hamiltonian(const LatticeSpec& spec, const InteractionSpec& inter) {
  return build_pair_hamiltonian(build_single_hamiltonian(spec), inter);
}

HamiltonianMatrix build_lab_frame_hamiltonian(const LabFrameSpec& spec, std::size_t n_sites) {
  if (n_sites < 2) throw SpecError("lab frame needs at least two sites");
  if (spec.bare_energies_mhz.size() != n_sites) {
    throw SpecError("lab frame has " + std::to_string(spec.bare_energies_mhz.size()) + " bare energies for " +
                    std::to_string(n_sites) + " sites");
  }
  for (double e : spec.bare_energies_mhz) {
    if (!std::isfinite(e)) throw SpecError("non-finite bare energy");
  }
  if (!(spec.rabi_mhz >= 0.0) || !std::isfinite(spec.detuning_mhz)) throw SpecError("invalid lab-frame drive");

  Basis basis{BasisKind::Single, {}};
  for (std::size_t k = 0; k < n_sites; ++k) basis.sites.push_back(spec.first_site + static_cast<int>(k));
  const auto n = static_cast<Eigen::Index>(n_sites);
  CMatrix h = CMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) h(k, k) = spec.bare_energies_mhz[k];

  const auto omega = spec.transition_frequencies_mhz();
  std::vector<TimeDepTerm> terms;
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    // Tones sit on the raising element <j+1|H|j>, which makes them resonant
    // in the interaction picture of the bare energies.
    CMatrix m = CMatrix::Zero(n, n);
    m(j + 1, j) = 0.5 * spec.rabi_mhz;
    Modulation f({Tone{1.0, omega[j] + spec.detuning_mhz}, Tone{1.0, omega[j] - spec.detuning_mhz}});
    terms.push_back({std::move(m), std::move(f)});
  }
  return HamiltonianMatrix(std::move(basis), std::move(h), std::move(terms));
}

}  // namespace synlat
