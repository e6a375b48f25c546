#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "msar/forward_model.hpp"
#include "msar/io_util.hpp"

namespace msar {

namespace {

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_u64(const std::string& buf, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[at + static_cast<std::size_t>(i)])) << (8 * i);
  return v;
}

void put_f64(std::string& buf, double d) { put_u64(buf, std::bit_cast<std::uint64_t>(d)); }
double get_f64(const std::string& buf, std::size_t at) { return std::bit_cast<double>(get_u64(buf, at)); }

}  // namespace

void write_phase_history(const std::filesystem::path& path, const PhaseHistory& history) {
  std::string buf;
  buf.reserve(32 + 16 * history.size());
  put_u64(buf, history.size());
  put_u64(buf, history.n_pulses);
  put_u64(buf, history.n_channels);
  put_u64(buf, history.n_f);
  for (Eigen::Index m = 0; m < history.values.size(); ++m) {
    put_f64(buf, history.values[m].real());
    put_f64(buf, history.values[m].imag());
  }
  atomic_write(path, buf);
}

PhaseHistory read_phase_history(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  if (buf.size() < 32) throw IoError(path.string() + ": truncated phase history header");
  const std::uint64_t m = get_u64(buf, 0);
  PhaseHistory h;
  h.n_pulses = get_u64(buf, 8);
  h.n_channels = get_u64(buf, 16);
  h.n_f = get_u64(buf, 24);
  if (m != h.n_pulses * h.n_channels * h.n_f)
    throw IoError(path.string() + ": header sizes are inconsistent (M != N_tx * N_rx * N_f)");
  if (buf.size() != 32 + 16 * m) throw IoError(path.string() + ": payload length does not match M");
  h.values.resize(static_cast<Eigen::Index>(m));
  for (std::uint64_t i = 0; i < m; ++i)
    h.values[static_cast<Eigen::Index>(i)] = Complex(get_f64(buf, 32 + 16 * i), get_f64(buf, 40 + 16 * i));
  return h;
}

void write_phase_history_csv(const std::filesystem::path& path, const PhaseHistory& history,
                             const std::vector<Measurement>& layout) {
  if (layout.size() != history.size())
    throw ContractError("phase history CSV: layout does not match the history length");
  std::ostringstream out;
  out << "m,k,l,t,re,im\n";
  for (std::size_t m = 0; m < layout.size(); ++m) {
    const auto& row = layout[m];
    const Complex v = history.values[static_cast<Eigen::Index>(m)];
    out << m << ',' << row.pulse << ',' << row.rx << ',' << format_double(row.pulse_time + row.time) << ','
        << format_double(v.real()) << ',' << format_double(v.imag()) << '\n';
  }
  atomic_write(path, out.str());
}

}  // namespace msar
