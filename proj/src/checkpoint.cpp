#include "xdrs/checkpoint.hpp"

#include <cstdint>
#include <cstring>

#include "xdrs/error.hpp"
#include "xdrs/text_util.hpp"

namespace xdrs {

namespace {

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double get_f64(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

void section(std::string& out, const std::string& name, const std::string& body) {
  out += "section " + name + " " + std::to_string(body.size()) + "\n";
  out += body;
  out += "\n";
}

[[noreturn]] void corrupt(const std::string& what) { fail(ErrorKind::ConfigError, "corrupt checkpoint: " + what); }

}  // namespace

std::string format_kv(const std::map<std::string, std::string>& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::map<std::string, std::string> parse_kv(std::string_view text) {
  std::map<std::string, std::string> kv;
  int line_no = 0;
  for (auto line : split_lines(text)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": expected key = value");
    kv[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  return kv;
}

Checkpoint Checkpoint::capture(const ParameterStore& store) {
  Checkpoint c;
  for (const Parameter* p : store.all()) c.tensors.push_back(Tensor{p->name(), p->shape(), p->trainable(), p->value});
  return c;
}

void Checkpoint::restore(ParameterStore& store) const {
  for (const auto& t : tensors) {
    Parameter* p = store.find(t.name);
    if (!p) fail(ErrorKind::ConfigError, "checkpoint tensor " + t.name + " has no matching parameter");
    if (p->shape() != t.shape)
      fail(ErrorKind::ShapeError, "checkpoint tensor " + t.name + " is " + std::to_string(t.shape.rows) + "x" +
                                      std::to_string(t.shape.cols) + ", model expects " +
                                      std::to_string(p->shape().rows) + "x" + std::to_string(p->shape().cols));
    p->value = t.data;
  }
  if (tensors.size() != store.size()) fail(ErrorKind::ConfigError, "checkpoint does not cover every model parameter");
}

std::string Checkpoint::serialize() const {
  std::string out = std::string(kCheckpointHeader) + "\n";
  section(out, "manifest", format_kv(manifest));
  for (const auto& [name, body] : blobs) section(out, "blob:" + name, body);
  std::string table, payload;
  for (const auto& t : tensors) {
    table += t.name + " " + std::to_string(t.shape.rows) + " " + std::to_string(t.shape.cols) + " " +
             (t.trainable ? "1" : "0") + "\n";
    for (double v : t.data) put_f64(payload, v);
  }
  section(out, "tensors", table);
  section(out, "payload", payload);
  return out;
}

Checkpoint Checkpoint::deserialize(const std::string& bytes) {
  const std::string header = std::string(kCheckpointHeader) + "\n";
  if (bytes.compare(0, header.size(), header) != 0) corrupt("missing header '" + std::string(kCheckpointHeader) + "'");
  Checkpoint c;
  std::size_t pos = header.size();
  std::string table, payload;
  bool have_payload = false;
  while (pos < bytes.size()) {
    const std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string::npos) corrupt("truncated section header");
    auto parts = split_whitespace(std::string_view(bytes).substr(pos, eol - pos));
    if (parts.size() != 3 || parts[0] != "section") corrupt("bad section header");
    std::size_t len = 0;
    try {
      len = std::stoull(std::string(parts[2]));
    } catch (const std::exception&) {
      corrupt("bad section length");
    }
    const std::size_t start = eol + 1;
    if (start + len + 1 > bytes.size()) corrupt("section " + std::string(parts[1]) + " is truncated");
    std::string body = bytes.substr(start, len);
    pos = start + len + 1;
    const std::string name(parts[1]);
    if (name == "manifest") {
      c.manifest = parse_kv(body);
    } else if (name.rfind("blob:", 0) == 0) {
      c.blobs[name.substr(5)] = std::move(body);
    } else if (name == "tensors") {
      table = std::move(body);
    } else if (name == "payload") {
      payload = std::move(body);
      have_payload = true;
    } else {
      corrupt("unknown section " + name);
    }
  }
  if (!have_payload) corrupt("no payload");
  std::size_t offset = 0;
  for (auto line : split_lines(table)) {
    auto f = split_whitespace(line);
    if (f.empty()) continue;
    if (f.size() != 4) corrupt("bad tensor entry");
    Tensor t;
    t.name = std::string(f[0]);
    t.shape = Shape{std::stoi(std::string(f[1])), std::stoi(std::string(f[2]))};
    t.trainable = f[3] == "1";
    const std::size_t n = t.shape.size();
    if (offset + 8 * n > payload.size()) corrupt("payload shorter than the tensor table");
    t.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) t.data[i] = get_f64(payload.data() + offset + 8 * i);
    offset += 8 * n;
    c.tensors.push_back(std::move(t));
  }
  if (offset != payload.size()) corrupt("payload longer than the tensor table");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) { write_file(path, ckpt.serialize()); }

Checkpoint load_checkpoint(const std::filesystem::path& path) { return Checkpoint::deserialize(read_file(path)); }

}  // namespace xdrs
