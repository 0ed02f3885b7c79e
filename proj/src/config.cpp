#include "fraclab/errors.hpp"
#include "fraclab/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

namespace fraclab {

std::string sha256_hex(const std::string& text) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("SHA-256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

SphereFunction make_k(const KSpec& spec, int n) {
  if (spec.family == "constant") return builtin::constant(n, spec.value);
  if (spec.family == "linear") return builtin::linear(n, spec.a, spec.b, spec.j == 0 ? n + 1 : spec.j);
  if (spec.family == "two-peak") {
    const double center = std::isnan(spec.center) ? builtin::two_peak_mean(n, spec.anisotropy) : spec.center;
    return builtin::two_peak(n, spec.base, spec.eps, center, spec.anisotropy);
  }
  if (spec.family == "harmonic") {
    const StoredField f = read_field(spec.file);
    if (f.field.dimension() != n) throw InputError("K file " + spec.file + " lives on another sphere");
    SphereFunction k = field_function(f.field);
    k.description = "harmonic series from " + spec.file;
    return k;
  }
  throw ConfigurationError("unknown K family '" + spec.family + "' (expected constant, linear, two-peak, harmonic)");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (is >> item) {
    std::string::size_type start = 0;
    while (start <= item.size()) {
      const auto comma = item.find(',', start);
      const std::string part = item.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!part.empty()) out.push_back(part);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

const std::set<std::string> kSections{"K", "spectrum", "bubble-residual", "expansion-verify", "flow", "existence"};

class Parser {
 public:
  explicit Parser(RunConfig& c) : c_(c) {
    auto real = [this](double& dst) { return [this, &dst](const std::string& v) { set(v, dst); }; };
    auto integer = [this](int& dst) { return [this, &dst](const std::string& v) { set(v, dst); }; };
    auto text = [](std::string& dst) { return [&dst](const std::string& v) { dst = v; }; };
    auto flag = [this](bool& dst) {
      return [this, &dst](const std::string& v) {
        if (v == "true" || v == "1" || v == "yes") dst = true;
        else if (v == "false" || v == "0" || v == "no") dst = false;
        else fail("expected true or false, got '" + v + "'");
      };
    };
    setters_ = {
        {"command", text(c.command)},
        {"n", integer(c.n)},
        {"sigma", real(c.sigma)},
        {"L", integer(c.truncation)},
        {"symmetry", [this](const std::string& v) {
           try {
             c_.symmetry = parse_symmetry(v);
           } catch (const Error& e) {
             fail(e.what());
           }
         }},
        {"seed", [this](const std::string& v) {
           if (!parse_number(v, c_.seed)) fail("expected a nonnegative integer, got '" + v + "'");
         }},
        {"output", text(c.output_dir)},
        {"K.family", text(c.k.family)},
        {"K.value", real(c.k.value)},
        {"K.a", real(c.k.a)},
        {"K.b", real(c.k.b)},
        {"K.j", integer(c.k.j)},
        {"K.base", real(c.k.base)},
        {"K.eps", real(c.k.eps)},
        {"K.center", real(c.k.center)},
        {"K.anisotropy", real(c.k.anisotropy)},
        {"K.file", text(c.k.file)},
        {"spectrum.k_max", integer(c.spectrum_k_max)},
        {"bubble-residual.lambda", real(c.residual_lambda)},
        {"bubble-residual.truncations", [this](const std::string& v) {
           c_.residual_truncations.clear();
           for (const auto& s : split_list(v)) {
             int x = 0;
             if (!parse_number(s, x)) fail("expected a list of integers, got '" + s + "'");
             c_.residual_truncations.push_back(x);
           }
         }},
        {"expansion-verify.truncation", integer(c.calibration.truncation)},
        {"expansion-verify.lambdas", [this](const std::string& v) {
           c_.calibration.lambdas.clear();
           for (const auto& s : split_list(v)) {
             double x = 0.0;
             if (!parse_number(s, x)) fail("expected a list of numbers, got '" + s + "'");
             c_.calibration.lambdas.push_back(x);
           }
         }},
        {"expansion-verify.residual_threshold", real(c.calibration.residual_threshold)},
        {"flow.method", [this](const std::string& v) {
           try {
             c_.flow.method = parse_flow_method(v);
           } catch (const Error& e) {
             fail(e.what());
           }
         }},
        {"flow.max_iterations", integer(c.flow.max_iterations)},
        {"flow.gradient_tolerance", real(c.flow.gradient_tolerance)},
        {"flow.memory", integer(c.flow.memory)},
        {"flow.check_interval", integer(c.flow.check_interval)},
        {"flow.max_bubbles", integer(c.flow.max_bubbles)},
        {"flow.concentration_lambda", real(c.flow.concentration_lambda)},
        {"flow.resolution_factor", real(c.flow.resolution_factor)},
        {"flow.lambda_floor", real(c.flow.lambda_floor)},
        {"flow.growth_checks", integer(c.flow.growth_checks)},
        {"flow.concentration_v", real(c.flow.concentration_v)},
        {"flow.negative_mass_limit", real(c.flow.negative_mass_limit)},
        {"flow.negative_mass_patience", integer(c.flow.negative_mass_patience)},
        {"flow.initial", text(c.flow_initial)},
        {"flow.perturbation", real(c.flow_perturbation)},
        {"flow.initial_file", text(c.flow_initial_file)},
        {"flow.trace", flag(c.flow_trace)},
        {"existence.p_max", integer(c.p_max)},
        {"existence.starts", integer(c.critical.starts)},
        {"existence.dedup_radius", real(c.critical.dedup_radius)},
        {"existence.nondegeneracy_floor", real(c.critical.nondegeneracy_floor)},
        {"existence.gradient_tolerance", real(c.critical.gradient_tolerance)},
    };
  }

  void parse(const std::string& text) {
    std::istringstream in(text);
    std::string raw, section;
    std::map<std::string, int> seen;
    for (line_ = 1; std::getline(in, raw); ++line_) {
      const std::string s = trim(raw.substr(0, raw.find('#')));
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') {
          fail("malformed section header '" + s + "'");
          continue;
        }
        section = trim(s.substr(1, s.size() - 2));
        if (!kSections.count(section)) fail("unknown section [" + section + "]");
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        fail("expected 'key = value', got '" + s + "'");
        continue;
      }
      const std::string key = trim(s.substr(0, eq));
      const std::string value = trim(s.substr(eq + 1));
      const std::string full = (section.empty() || key.find('.') != std::string::npos) ? key : section + "." + key;
      if (const auto it = seen.find(full); it != seen.end()) {
        fail("duplicate key '" + full + "' (first set on line " + std::to_string(it->second) + ")");
        continue;
      }
      seen[full] = line_;
      const auto setter = setters_.find(full);
      if (setter == setters_.end()) {
        fail("unknown key '" + full + "'");
        continue;
      }
      if (value.empty()) {
        fail("key '" + full + "' has no value");
        continue;
      }
      setter->second(value);
      c_.entries[full] = value;
    }
    line_ = 0;
  }

  void fail(const std::string& message) {
    errors_.push_back(line_ > 0 ? "line " + std::to_string(line_) + ": " + message : message);
  }
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  template <typename T>
  void set(const std::string& v, T& dst) {
    if (!parse_number(v, dst)) fail("expected a number, got '" + v + "'");
  }

  RunConfig& c_;
  std::map<std::string, std::function<void(const std::string&)>> setters_;
  std::vector<std::string> errors_;
  int line_ = 0;
};

void validate(const RunConfig& c, const std::string& command, Parser& p) {
  if (!command.empty() && std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
    p.fail("unknown command '" + command + "'");
  }
  if (c.n < 1) p.fail("n must be at least 1");
  if (c.symmetry == Symmetry::full && c.n != 2 && c.n != 3) {
    p.fail("symmetry = full supports n = 2, 3 only; use zonal (or axial on S^3)");
  }
  if (c.symmetry == Symmetry::axial && c.n != 3) p.fail("symmetry = axial is available on S^3 only");
  if (!(c.sigma > 0.0) || !(c.sigma < c.n / 2.0)) {
    std::ostringstream os;
    os << "sigma = " << c.sigma << " must lie in (0, n/2) = (0, " << c.n / 2.0 << ")";
    p.fail(os.str());
  }
  if (c.truncation < 1) p.fail("L must be at least 1");

  static const std::set<std::string> families{"constant", "linear", "two-peak", "harmonic"};
  if (!families.count(c.k.family)) p.fail("unknown K family '" + c.k.family + "'");
  if (c.k.family == "linear" && (c.k.j < 0 || c.k.j > c.n + 1)) p.fail("K.j must lie in 1..n+1");
  if (c.k.family == "harmonic") {
    if (c.k.file.empty()) {
      p.fail("K.family = harmonic needs K.file");
    } else {
      try {
        const StoredField f = read_field(c.k.file);
        if (f.field.dimension() != c.n) p.fail("K.file " + c.k.file + " lives on S^" + std::to_string(f.field.dimension()));
      } catch (const Error& e) {
        p.fail(std::string("unreadable K file: ") + e.what());
      }
    }
  }

  if (command == "spectrum" && c.spectrum_k_max < 0) p.fail("spectrum.k_max must be nonnegative");
  if (command == "bubble-residual") {
    if (!(c.residual_lambda >= 1.0)) p.fail("bubble-residual.lambda must be >= 1");
    if (c.residual_truncations.empty()) p.fail("bubble-residual.truncations is empty");
    for (int L : c.residual_truncations) {
      if (L < 1) p.fail("bubble-residual.truncations entries must be positive");
    }
  }
  if (command == "expansion-verify") {
    if (c.calibration.lambdas.size() < 6) p.fail("expansion-verify.lambdas needs at least 6 values");
    for (double l : c.calibration.lambdas) {
      if (!(l >= 1.0)) p.fail("expansion-verify.lambdas entries must be >= 1");
    }
    if (c.calibration.truncation < 1) p.fail("expansion-verify.truncation must be positive");
  }
  if (command == "flow") {
    static const std::set<std::string> initials{"perturbed-constant", "constant", "file"};
    if (!initials.count(c.flow_initial)) p.fail("flow.initial must be perturbed-constant, constant or file");
    if (c.flow_initial == "file" && c.flow_initial_file.empty()) p.fail("flow.initial = file needs flow.initial_file");
    if (c.flow.max_iterations < 0) p.fail("flow.max_iterations must be nonnegative");
    if (c.flow.check_interval < 1) p.fail("flow.check_interval must be positive");
    if (c.flow.max_bubbles < 1) p.fail("flow.max_bubbles must be positive");
    if (!(c.flow.gradient_tolerance > 0.0)) p.fail("flow.gradient_tolerance must be positive");
    if (c.flow.resolution_factor < 0.0) p.fail("flow.resolution_factor must be nonnegative");
    if (!(c.flow.lambda_floor >= 1.0)) p.fail("flow.lambda_floor must be at least 1");
    if (!(c.flow.concentration_lambda > 1.0)) p.fail("flow.concentration_lambda must exceed 1");
  }
  if (command == "existence") {
    if (c.n < 3) p.fail("existence needs n >= 3");
    if (!(c.sigma > 0.0) || !(c.sigma < (c.n - 2) / 2.0)) {
      std::ostringstream os;
      os << "existence needs sigma in (0, (n - 2)/2) = (0, " << (c.n - 2) / 2.0 << "); got sigma = " << c.sigma;
      p.fail(os.str());
    }
    if (c.p_max < 1) p.fail("existence.p_max must be at least 1");
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& command) {
  RunConfig c;
  Parser p(c);
  p.parse(text);
  if (!command.empty()) c.command = command;
  validate(c, c.command, p);
  if (!p.errors().empty()) {
    std::ostringstream os;
    os << p.errors().size() << " configuration error(s):";
    for (const auto& e : p.errors()) os << "\n  " << e;
    throw ConfigurationError(os.str());
  }
  std::ostringstream canon;
  for (const auto& [k, v] : c.entries) {
    if (k != "seed" && k != "output") canon << k << '=' << v << '\n';
  }
  c.digest = sha256_hex(canon.str());
  return c;
}

RunConfig load_config(const std::string& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), command);
}

}  // namespace fraclab
