#include "kirchhoff/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace kirchhoff {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << "t,s,s_prime,s_second,E,F,I,H1,S,V,residual\n";
  if (traj.samples.empty()) return os.str();
  const double f0 = traj.samples.front().F;
  for (const auto& smp : traj.samples) {
    os << format_double(smp.t) << ',' << format_double(smp.s) << ','
       << format_double(smp.s_prime) << ',' << format_double(smp.s_second)
       << ',' << format_double(smp.E) << ',' << format_double(smp.F) << ',';
    if (smp.I) os << format_double(*smp.I);
    os << ',' << format_double(smp.H1) << ',' << format_double(smp.S_accum)
       << ',' << format_double(smp.V_accum) << ','
       << format_double(smp.F - f0 + 0.25 * smp.S_accum) << '\n';
  }
  return os.str();
}

std::string sweep_csv(const SweepReport& report) {
  std::ostringstream os;
  os << "epsilon,T_event,censored,sup_F_ratio,sup_F_ratio_horizon,t_cap,"
        "scaling_pass,envelope_pass\n";
  for (const auto& rec : report.records) {
    os << format_double(rec.epsilon) << ',' << format_double(rec.T_event) << ','
       << (rec.censored ? 1 : 0) << ',' << format_double(rec.sup_F_ratio) << ','
       << format_double(rec.sup_F_ratio_horizon) << ','
       << format_double(rec.t_cap) << ',' << (rec.scaling_pass ? 1 : 0) << ','
       << (rec.envelope_pass ? 1 : 0) << '\n';
  }
  return os.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw IoError("short write to '" + path + "'");
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  write_text_file(path, trajectory_csv(traj));
}

void write_sweep_csv(const std::string& path, const SweepReport& report) {
  write_text_file(path, sweep_csv(report));
}

}  // namespace kirchhoff
