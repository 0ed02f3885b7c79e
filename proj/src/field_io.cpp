#include "fraclab/errors.hpp"
#include "fraclab/harness.hpp"

#include <fstream>
#include <sstream>

namespace fraclab {

int symmetry_code(Symmetry s) {
  switch (s) {
    case Symmetry::full:
      return 0;
    case Symmetry::zonal:
      return 1;
    case Symmetry::axial:
      return 2;
  }
  return 0;
}

Symmetry symmetry_from_code(int code) {
  switch (code) {
    case 0:
      return Symmetry::full;
    case 1:
      return Symmetry::zonal;
    case 2:
      return Symmetry::axial;
    default:
      throw InputError("unknown symmetry code " + std::to_string(code) + " (expected 0 full, 1 zonal, 2 axial)");
  }
}

Symmetry parse_symmetry(const std::string& name) {
  if (name == "full") return Symmetry::full;
  if (name == "zonal") return Symmetry::zonal;
  if (name == "axial") return Symmetry::axial;
  throw ConfigurationError("unknown symmetry '" + name + "' (expected full, axial or zonal)");
}

void write_field(const std::string& path, const SpectralField& field, double sigma, const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write field file " + path);
  out.precision(17);
  if (!comment.empty()) out << "# " << comment << '\n';
  out << field.dimension() << ' ' << sigma << ' ' << field.truncation() << ' '
      << symmetry_code(field.basis().symmetry()) << '\n';
  for (Eigen::Index i = 0; i < field.coefficients().size(); ++i) out << field.coefficients()[i] << '\n';
  if (!out) throw InputError("write to field file " + path + " failed");
}

StoredField read_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read field file " + path);
  std::string header;
  while (std::getline(in, header) && !header.empty() && header[0] == '#') {
  }
  std::istringstream hs(header);
  int n = 0, L = 0, code = -1;
  double sigma = 0.0;
  std::string extra;
  if (!(hs >> n >> sigma >> L >> code) || (hs >> extra)) {
    throw InputError(path + ": header must be 'n sigma L symmetry'");
  }
  if (n < 1 || L < 0) throw InputError(path + ": header has n < 1 or L < 0");
  const Symmetry sym = symmetry_from_code(code);
  auto basis = HarmonicBasis::create(n, L, sym);
  Eigen::VectorXd c(basis->size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (!(in >> c[i])) {
      std::ostringstream os;
      os << path << ": expected " << c.size() << " coefficients, read " << i;
      throw InputError(os.str());
    }
  }
  if (in >> extra) throw InputError(path + ": trailing data after " + std::to_string(c.size()) + " coefficients");
  return StoredField{SpectralField(basis, std::move(c)), sigma};
}

}  // namespace fraclab
