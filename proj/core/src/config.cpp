#include "rumi/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rumi/decode.hpp"

namespace rumi {

const std::vector<std::string> kConfigKeys = {
    "d",        "word_dim",   "char_dim", "filters", "filter_width", "max_word_len", "max_context_len",
    "variant",  "batch_size", "lr",       "lr_decayed", "patience",  "min_improvement", "l2",
    "aqsl",     "dropout",    "rho",      "eps",     "steps",        "eval_every",   "seed",
    "window",   "data_dir",   "train",    "dev",     "glove",        "checkpoint_dir"};

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty())
    throw std::invalid_argument("config: bad value '" + std::string(text) + "' for " + std::string(key));
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value))
      throw std::invalid_argument("config: non-finite value for " + std::string(key));
  }
  return value;
}

template <typename T>
std::string show(T v) {
  if constexpr (std::is_floating_point_v<T>) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
  } else {
    return std::to_string(v);
  }
}

}  // namespace

RunConfig RunConfig::profile(std::string_view name) {
  RunConfig cfg;
  if (name == "standard") return cfg;
  if (name == "desk") {
    cfg.d = 20;
    cfg.filters = 20;
    cfg.batch_size = 16;
    cfg.steps = 500;
    cfg.eval_every = 50;
    cfg.dropout = 0.0;
    return cfg;
  }
  throw std::invalid_argument("config: unknown profile '" + std::string(name) + "'");
}

void RunConfig::set(std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  const std::string k(key);
  auto size = [&](std::size_t& field) { field = parse_number<std::size_t>(key, value); };
  auto real = [&](double& field) { field = parse_number<double>(key, value); };

  if (k == "d") size(d);
  else if (k == "word_dim") size(word_dim);
  else if (k == "char_dim") size(char_dim);
  else if (k == "filters") size(filters);
  else if (k == "filter_width") size(filter_width);
  else if (k == "max_word_len") size(max_word_len);
  else if (k == "max_context_len") size(max_context_len);
  else if (k == "variant") {
    VariantConfig::parse(value);  // reject unknown ids early
    variant = std::string(value);
  }
  else if (k == "batch_size") size(batch_size);
  else if (k == "lr") real(lr);
  else if (k == "lr_decayed") real(lr_decayed);
  else if (k == "patience") size(patience);
  else if (k == "min_improvement") real(min_improvement);
  else if (k == "l2") real(l2);
  else if (k == "aqsl") real(aqsl);
  else if (k == "dropout") real(dropout);
  else if (k == "rho") real(rho);
  else if (k == "eps") real(eps);
  else if (k == "steps") size(steps);
  else if (k == "eval_every") size(eval_every);
  else if (k == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (k == "window") size(window);
  else if (k == "data_dir") data_dir = std::string(value);
  else if (k == "train") train = std::string(value);
  else if (k == "dev") dev = std::string(value);
  else if (k == "glove") glove = std::string(value);
  else if (k == "checkpoint_dir") checkpoint_dir = std::string(value);
  else throw std::invalid_argument("config: unknown key '" + k + "'");
  explicit_keys.insert(k);
}

std::string RunConfig::get(std::string_view key) const {
  const std::string k(key);
  if (k == "d") return show(d);
  if (k == "word_dim") return show(word_dim);
  if (k == "char_dim") return show(char_dim);
  if (k == "filters") return show(filters);
  if (k == "filter_width") return show(filter_width);
  if (k == "max_word_len") return show(max_word_len);
  if (k == "max_context_len") return show(max_context_len);
  if (k == "variant") return variant;
  if (k == "batch_size") return show(batch_size);
  if (k == "lr") return show(lr);
  if (k == "lr_decayed") return show(lr_decayed);
  if (k == "patience") return show(patience);
  if (k == "min_improvement") return show(min_improvement);
  if (k == "l2") return show(l2);
  if (k == "aqsl") return show(aqsl);
  if (k == "dropout") return show(dropout);
  if (k == "rho") return show(rho);
  if (k == "eps") return show(eps);
  if (k == "steps") return show(steps);
  if (k == "eval_every") return show(eval_every);
  if (k == "seed") return show(seed);
  if (k == "window") return show(window);
  if (k == "data_dir") return data_dir;
  if (k == "train") return train;
  if (k == "dev") return dev;
  if (k == "glove") return glove;
  if (k == "checkpoint_dir") return checkpoint_dir;
  throw std::invalid_argument("config: unknown key '" + k + "'");
}

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("config: ") + what);
  };
  require(d >= 1, "d must be >= 1");
  require(word_dim >= 1, "word_dim must be >= 1");
  require(char_dim >= 1, "char_dim must be >= 1");
  require(filters >= 1, "filters must be >= 1");
  require(filter_width >= 1, "filter_width must be >= 1");
  require(max_word_len >= 1, "max_word_len must be >= 1");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(lr > 0.0, "lr must be > 0");
  require(lr_decayed > 0.0, "lr_decayed must be > 0");
  require(min_improvement >= 0.0, "min_improvement must be >= 0");
  require(l2 >= 0.0, "l2 must be >= 0");
  require(aqsl >= 0.0, "aqsl must be >= 0");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
  require(rho > 0.0 && rho < 1.0, "rho must be in (0, 1)");
  require(eps > 0.0, "eps must be > 0");
  require(eval_every >= 1, "eval_every must be >= 1");
  VariantConfig::parse(variant);
}

ModelDims RunConfig::model_dims() const { return {d, word_dim, char_dim, filters, filter_width}; }

LossWeights RunConfig::loss_weights() const {
  const VariantConfig v = variant_config();
  return {v.l2 ? l2 : 0.0, v.aqsl ? aqsl : 0.0};
}

VariantConfig RunConfig::variant_config() const { return VariantConfig::parse(variant); }

std::size_t RunConfig::decode_window() const {
  return variant_config().local_search ? window : kUnboundedWindow;
}

std::filesystem::path RunConfig::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  if (p.empty() || p.is_absolute() || data_dir.empty()) return p;
  return std::filesystem::path(data_dir) / p;
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& k : kConfigKeys) out += k + "=" + get(k) + "\n";
  return out;
}

void apply_config_text(RunConfig& cfg, std::string_view text) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    try {
      cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      std::string msg = e.what();
      if (msg.rfind("config: ", 0) == 0) msg.erase(0, 8);
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + msg);
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

}  // namespace rumi
