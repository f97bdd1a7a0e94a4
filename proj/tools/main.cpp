#include <distsynth/distsynth.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace {

using namespace distsynth;

// Exit codes: 0 ok, 1 verification failed, 2 I/O failure, 3 invalid input.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return ss.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

Rational parse_delta(const std::string& text) {
  const Rational delta = parse_rational(text);
  if (delta <= 0 || delta >= 1) throw SpecError("delta must lie in (0,1)");
  return delta;
}

// Resolves the per-target default and validates an explicit choice.
bool use_rational_format(const std::string& format, bool is_discrete) {
  if (format.empty()) return is_discrete;
  if (format == "rational") return true;
  if (format == "decimal") return false;
  throw SpecError("format must be \"rational\" or \"decimal\"");
}

int cmd_synthesize(const std::string& spec_path, const std::string& out_path,
                   const std::string& delta_str) {
  const Spec spec = parse_spec(read_file(spec_path));
  const Rational delta = parse_delta(delta_str);
  std::string text;
  if (const auto* d = std::get_if<DiscreteSpec>(&spec)) {
    text = construction_to_json(build_dyadic_space(*d, delta)).dump(2) + "\n";
  } else {
    text = transform_to_json(build_transform(std::get<DensitySpec>(spec))).dump(2) + "\n";
  }
  write_output(out_path, text);
  return 0;
}

int cmd_sample(const std::string& spec_path, const std::string& out_path, long n,
               std::uint64_t seed, const std::string& delta_str, const std::string& format) {
  const Spec spec = parse_spec(read_file(spec_path));
  const Rational delta = parse_delta(delta_str);
  if (n < 1) throw SpecError("n must be >= 1");

  std::string body = "distance\n";
  const Stream stream(seed);
  if (const auto* d = std::get_if<DiscreteSpec>(&spec)) {
    const bool rational_fmt = use_rational_format(format, true);
    const SelectionSpace space = build_dyadic_space(*d, delta);
    for (long i = 0; i < n; ++i) {
      Stream row = stream.substream(static_cast<std::uint64_t>(i));
      const Rational dist = sample_distance(space, row);
      body += rational_fmt ? format_rational(dist) : format_double(to_double(dist));
      body += "\n";
    }
  } else {
    if (use_rational_format(format, false))
      throw SpecError("density targets sample as decimals; use --format decimal");
    const TransformRecord record = build_transform(std::get<DensitySpec>(spec));
    for (long i = 0; i < n; ++i) {
      Stream row = stream.substream(static_cast<std::uint64_t>(i));
      body += format_double(record.sample(row));
      body += "\n";
    }
  }
  write_output(out_path, body);
  return 0;
}

int cmd_dist(const std::string& spec_path, const std::string& out_path, long grid,
             const std::string& delta_str, const std::string& format) {
  const Spec spec = parse_spec(read_file(spec_path));
  const Rational delta = parse_delta(delta_str);

  std::string body;
  if (const auto* d = std::get_if<DiscreteSpec>(&spec)) {
    const bool rational_fmt = use_rational_format(format, true);
    const SelectionSpace space = build_dyadic_space(*d, delta);
    body = "value,prob\n";
    for (const auto& atom : exact_distance_distribution(space)) {
      if (rational_fmt) {
        body += format_rational(atom.value) + "," + format_rational(atom.prob) + "\n";
      } else {
        body += format_double(to_double(atom.value)) + "," +
                format_double(to_double(atom.prob)) + "\n";
      }
    }
  } else {
    if (grid < 2) throw SpecError("grid must be >= 2");
    const bool rational_fmt = use_rational_format(format, false);
    const auto& density = std::get<DensitySpec>(spec);
    body = "t,G\n";
    for (long i = 0; i < grid; ++i) {
      const Rational t(i, grid - 1);
      const Rational g = density.cdf_exact(t);
      if (rational_fmt) {
        body += format_rational(t) + "," + format_rational(g) + "\n";
      } else {
        body += format_double(to_double(t)) + "," + format_double(to_double(g)) + "\n";
      }
    }
  }
  write_output(out_path, body);
  return 0;
}

int cmd_verify(const std::string& spec_path, const std::string& out_path, long n,
               std::uint64_t seed, const std::string& delta_str) {
  const Spec spec = parse_spec(read_file(spec_path));
  const Rational delta = parse_delta(delta_str);
  if (n < 1) throw SpecError("n must be >= 1");

  VerificationReport report;
  if (const auto* d = std::get_if<DiscreteSpec>(&spec)) {
    const SelectionSpace space = build_dyadic_space(*d, delta);
    report.construction_id = construction_id_of(construction_to_json(space));
    report.add(check_distribution_exact(space, *d));
    report.add(check_telescoping(space, *d));
    report.add(check_gap_structure(space));
    report.add(check_metric_axioms(space, {200, 100000, seed}));
    report.add(check_distribution_statistical_discrete(space, *d, n, seed));
  } else {
    const TransformRecord record = build_transform(std::get<DensitySpec>(spec));
    report.construction_id = construction_id_of(transform_to_json(record));
    const double alpha = record.alpha_value();
    report.add(check_fw_bounds(alpha));

    const auto fw_grid =
        uniform_grid_table([&](double t) { return fw_eval(alpha, t); }, 200);
    const auto pinch =
        check_pinched_composition(to_double(record.epsilon()), 1.0, fw_grid, 1e-12);
    report.add({"pinched_subadditivity", pinch.pass, pinch.worst_margin, 0, 0, "1e-12",
                "worst pair (" + format_double(pinch.worst_x) + ", " +
                    format_double(pinch.worst_y) + ")"});

    const auto phi_grid =
        uniform_grid_table([&](double t) { return record.phi(t); }, 200);
    const auto phi_pinch = check_pinched_composition(1.0, 1.0, phi_grid, 1e-10);
    report.add({"phi_subadditive_grid", phi_pinch.pass, phi_pinch.worst_margin, 0, 0, "1e-10",
                "worst pair (" + format_double(phi_pinch.worst_x) + ", " +
                    format_double(phi_pinch.worst_y) + ")"});

    report.add(check_metric_axioms_transformed([&](double t) { return record.phi(t); },
                                               alpha, n, seed));
    report.add(check_distribution_statistical_continuous(
        "distribution_statistical", [&](Stream& s) { return record.sample(s); },
        [&](double t) { return record.density().cdf(t); }, n, seed));
  }
  report.finalize();

  if (!out_path.empty()) write_output(out_path, report.to_json().dump(2) + "\n");
  std::cout << report.to_text();
  std::cout.flush();
  return report.overall ? 0 : 1;
}

int cmd_fw_table(const std::string& out_path, const std::string& alpha_list, long grid) {
  if (grid < 2) throw SpecError("grid must be >= 2");
  std::vector<double> alphas;
  std::stringstream ss(alpha_list);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) throw SpecError("empty alpha in list");
    char* end = nullptr;
    const double a = std::strtod(token.c_str(), &end);
    if (end == nullptr || *end != '\0') throw SpecError("invalid alpha: '" + token + "'");
    if (!(a > 0.0 && a < 0.5)) throw SpecError("alpha must lie in (0,1/2)");
    alphas.push_back(a);
  }
  if (alphas.empty()) throw SpecError("alpha list is empty");

  std::string body = "t,alpha,F_W\n";
  for (const double a : alphas) {
    for (long i = 0; i < grid; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(grid - 1);
      body += format_double(t) + "," + format_double(a) + "," +
              format_double(fw_eval(a, t)) + "\n";
    }
  }
  write_output(out_path, body);
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Builds measured metric spaces whose distance d(X,Y) has a prescribed law"};
  app.require_subcommand(1);

  std::string spec_path, out_path, format, alpha_list;
  std::string delta_str = "1e-9";
  long n = 100000;
  long grid = 101;
  std::uint64_t seed = 0;

  auto add_spec = [&](CLI::App* cmd) {
    cmd->add_option("--spec", spec_path, "Path to the target spec (JSON)")->required();
  };
  auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_path, "Output path (default: stdout)");
  };

  auto* syn = app.add_subcommand("synthesize", "Emit the construction record for a target");
  add_spec(syn);
  add_out(syn);
  syn->add_option("--delta", delta_str, "Truncation budget in (0,1)");

  auto* smp = app.add_subcommand("sample", "Draw distances d(X,Y) as CSV");
  add_spec(smp);
  add_out(smp);
  smp->add_option("--n", n, "Number of draws");
  smp->add_option("--seed", seed, "RNG seed");
  smp->add_option("--delta", delta_str, "Truncation budget in (0,1)");
  smp->add_option("--format", format, "rational|decimal");

  auto* dst = app.add_subcommand("dist", "Emit the exact distance law / CDF grid as CSV");
  add_spec(dst);
  add_out(dst);
  dst->add_option("--grid", grid, "Grid points for density targets");
  dst->add_option("--delta", delta_str, "Truncation budget in (0,1)");
  dst->add_option("--format", format, "rational|decimal");

  auto* ver = app.add_subcommand("verify", "Check the construction and emit a report");
  add_spec(ver);
  ver->add_option("--out", out_path, "Write the JSON report here");
  ver->add_option("--n", n, "Statistical sample size");
  ver->add_option("--seed", seed, "RNG seed");
  ver->add_option("--delta", delta_str, "Truncation budget in (0,1)");

  auto* fwt = app.add_subcommand("fw-table", "Tabulate the base-space distance CDF F_W");
  add_out(fwt);
  fwt->add_option("--alpha", alpha_list, "Comma-separated alpha values in (0,1/2)")->required();
  fwt->add_option("--grid", grid, "Grid points per alpha");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  if (syn->parsed()) return cmd_synthesize(spec_path, out_path, delta_str);
  if (smp->parsed()) return cmd_sample(spec_path, out_path, n, seed, delta_str, format);
  if (dst->parsed()) return cmd_dist(spec_path, out_path, grid, delta_str, format);
  if (ver->parsed()) return cmd_verify(spec_path, out_path, n, seed, delta_str);
  return cmd_fw_table(out_path, alpha_list, grid);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
