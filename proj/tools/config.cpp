#include "config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "gotedit/error.hpp"

namespace gotedit::cli {
namespace {

// Raised by field setters; the parser attaches the key and line.
struct BadValue {
  std::string message;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || std::isnan(v)) {
    throw BadValue{"expected a number, got '" + s + "'"};
  }
  return v;
}

long long to_integer(const std::string& s) {
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw BadValue{"expected an integer, got '" + s + "'"};
  }
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || s[0] == '-' || end != s.c_str() + s.size() || errno == ERANGE) {
    throw BadValue{"expected a non-negative integer, got '" + s + "'"};
  }
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw BadValue{"expected true or false, got '" + s + "'"};
}

struct Field {
  std::string name;  // section.key
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
  bool affects_results = true;
};

template <class Member>
Field real(std::string name, Member member, double lo, double hi) {
  return Field{name,
               [=](ExperimentConfig& c, const std::string& v) {
                 const double x = to_double(v);
                 if (!(x >= lo && x <= hi)) {
                   throw BadValue{"must lie in [" + format_double(lo) + ", " + format_double(hi) + "], got " + v};
                 }
                 member(c) = x;
               },
               [=](const ExperimentConfig& c) {
                 ExperimentConfig copy = c;
                 return format_double(member(copy));
               }};
}

template <class Member>
Field integer(std::string name, Member member, long long lo, long long hi) {
  return Field{name,
               [=](ExperimentConfig& c, const std::string& v) {
                 const long long x = to_integer(v);
                 if (x < lo || x > hi) {
                   throw BadValue{"must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + v};
                 }
                 member(c) = static_cast<int>(x);
               },
               [=](const ExperimentConfig& c) {
                 ExperimentConfig copy = c;
                 return std::to_string(member(copy));
               }};
}

template <class Member>
Field seed(std::string name, Member member) {
  return Field{name, [=](ExperimentConfig& c, const std::string& v) { member(c) = to_u64(v); },
               [=](const ExperimentConfig& c) {
                 ExperimentConfig copy = c;
                 return std::to_string(member(copy));
               }};
}

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBig = 1e12;

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    auto scene = [](ExperimentConfig& c) -> SceneConfig& { return c.study.scene; };
    auto look = [](ExperimentConfig& c) -> Appearance& { return c.study.scene.look; };
    auto model = [](ExperimentConfig& c) -> TemplateConfig& { return c.study.model; };
    auto tracker = [](ExperimentConfig& c) -> TrackerConfig& { return c.study.tracker; };

    f.push_back(integer("scene.frames", [=](ExperimentConfig& c) -> int& { return scene(c).frames; }, 1, 100000));
    f.push_back(integer("scene.height", [=](ExperimentConfig& c) -> int& { return scene(c).height; }, 2, 4096));
    f.push_back(integer("scene.width", [=](ExperimentConfig& c) -> int& { return scene(c).width; }, 2, 4096));
    f.push_back(integer("scene.c_sem", [=](ExperimentConfig& c) -> int& { return scene(c).c_sem; }, 1, 1024));
    f.push_back(integer("scene.c_geo", [=](ExperimentConfig& c) -> int& { return scene(c).c_geo; }, 1, 1024));
    f.push_back(integer("scene.distractors", [=](ExperimentConfig& c) -> int& { return scene(c).distractors; }, 0, 1000));
    f.push_back(integer("scene.occlusions", [=](ExperimentConfig& c) -> int& { return scene(c).occlusions; }, 0, 1000));
    f.push_back(real("scene.alpha", [=](ExperimentConfig& c) -> double& { return scene(c).alpha; }, 0, 1));
    f.push_back(real("scene.beta", [=](ExperimentConfig& c) -> double& { return scene(c).beta; }, 0, 1));
    f.push_back(real("scene.rho", [=](ExperimentConfig& c) -> double& { return scene(c).rho; }, 0, 1));
    f.push_back(real("scene.distractor_offset", [=](ExperimentConfig& c) -> double& { return scene(c).distractor_offset; }, 0, kBig));
    f.push_back(real("scene.box_half", [=](ExperimentConfig& c) -> double& { return scene(c).box_half; }, 1e-6, kBig));
    f.push_back(real("scene.speed", [=](ExperimentConfig& c) -> double& { return scene(c).speed; }, 0, kBig));
    f.push_back(real("scene.wobble", [=](ExperimentConfig& c) -> double& { return scene(c).wobble; }, 0, kBig));
    f.push_back(integer("scene.event_start", [=](ExperimentConfig& c) -> int& { return scene(c).event_start; }, 0, 100000));
    f.push_back(integer("scene.event_spacing", [=](ExperimentConfig& c) -> int& { return scene(c).event_spacing; }, 1, 100000));
    f.push_back(integer("scene.event_length", [=](ExperimentConfig& c) -> int& { return scene(c).event_length; }, 1, 100000));
    f.push_back(integer("scene.occlusion_half", [=](ExperimentConfig& c) -> int& { return scene(c).occlusion_half; }, 0, 4096));

    f.push_back(real("look.sem_amplitude", [=](ExperimentConfig& c) -> double& { return look(c).sem_amplitude; }, -kBig, kBig));
    f.push_back(real("look.geo_amplitude", [=](ExperimentConfig& c) -> double& { return look(c).geo_amplitude; }, -kBig, kBig));
    f.push_back(real("look.sem_sigma", [=](ExperimentConfig& c) -> double& { return look(c).sem_sigma; }, 1e-6, kBig));
    f.push_back(real("look.geo_sigma", [=](ExperimentConfig& c) -> double& { return look(c).geo_sigma; }, 1e-6, kBig));
    f.push_back(real("look.distractor_geo_gain", [=](ExperimentConfig& c) -> double& { return look(c).distractor_geo_gain; }, 0,
                     kBig));
    f.push_back(integer("look.clutter", [=](ExperimentConfig& c) -> int& { return look(c).clutter; }, 0, 10000));
    f.push_back(real("look.clutter_amplitude", [=](ExperimentConfig& c) -> double& { return look(c).clutter_amplitude; }, -kBig,
                     kBig));
    f.push_back(real("look.background_amplitude", [=](ExperimentConfig& c) -> double& { return look(c).background_amplitude; },
                     -kBig, kBig));
    f.push_back(real("look.sem_noise", [=](ExperimentConfig& c) -> double& { return look(c).sem_noise; }, 0, kBig));
    f.push_back(real("look.geo_noise", [=](ExperimentConfig& c) -> double& { return look(c).geo_noise; }, 0, kBig));
    f.push_back(integer("look.sem_rank", [=](ExperimentConfig& c) -> int& { return look(c).sem_rank; }, 1, 1024));
    f.push_back(integer("look.geo_rank", [=](ExperimentConfig& c) -> int& { return look(c).geo_rank; }, 1, 1024));
    f.push_back(seed("look.backbone_seed", [=](ExperimentConfig& c) -> std::uint64_t& { return look(c).backbone_seed; }));

    f.push_back(real("model.align_in_span", [=](ExperimentConfig& c) -> double& { return model(c).align_in_span; }, 0, 1));
    f.push_back(real("model.align_gain", [=](ExperimentConfig& c) -> double& { return model(c).align_gain; }, -kBig, kBig));
    f.push_back(real("model.gate_bias", [=](ExperimentConfig& c) -> double& { return model(c).gate_bias; }, -kBig, kBig));
    f.push_back(real("model.embedding_norm", [=](ExperimentConfig& c) -> double& { return model(c).embedding_norm; }, 1e-12, kBig));
    f.push_back(real("model.attention_gain", [=](ExperimentConfig& c) -> double& { return model(c).attention_gain; }, -kBig, kBig));
    f.push_back(real("model.geo_head_gain", [=](ExperimentConfig& c) -> double& { return model(c).geo_head_gain; }, -kBig, kBig));
    f.push_back(real("model.pe_scale", [=](ExperimentConfig& c) -> double& { return model(c).pe_scale; }, -kBig, kBig));
    f.push_back(Field{"model.params_dir", [](ExperimentConfig& c, const std::string& v) { c.params_dir = v; },
                      [](const ExperimentConfig& c) { return c.params_dir; }});

    f.push_back(Field{"editing.lambda",
                      [=](ExperimentConfig& c, const std::string& v) {
                        if (v == "auto") {
                          tracker(c).lambda.reset();
                          return;
                        }
                        const double x = to_double(v);
                        if (!(x >= 0 && x < kInf)) throw BadValue{"must be 'auto' or a finite number >= 0, got " + v};
                        tracker(c).lambda = x;
                      },
                      [=](const ExperimentConfig& c) {
                        const auto& l = c.study.tracker.lambda;
                        return l ? format_double(*l) : std::string("auto");
                      }});
    f.push_back(real("editing.eps_rel", [=](ExperimentConfig& c) -> double& { return tracker(c).policy.eps_rel; }, 0, kBig));
    f.push_back(real("editing.eps_abs", [=](ExperimentConfig& c) -> double& { return tracker(c).policy.eps_abs; }, 0, kBig));
    f.push_back(Field{"editing.source",
                      [=](ExperimentConfig& c, const std::string& v) {
                        if (v == to_string(ProjectorSource::refs_and_current)) {
                          tracker(c).source = ProjectorSource::refs_and_current;
                        } else if (v == to_string(ProjectorSource::refs_only)) {
                          tracker(c).source = ProjectorSource::refs_only;
                        } else {
                          throw BadValue{"expected refs_and_current or refs_only, got '" + v + "'"};
                        }
                      },
                      [](const ExperimentConfig& c) { return std::string(to_string(c.study.tracker.source)); }});
    f.push_back(Field{"editing.solver",
                      [=](ExperimentConfig& c, const std::string& v) {
                        auto& s = tracker(c).policy.solver;
                        if (v == "auto") s = EigenSolver::automatic;
                        else if (v == "jacobi") s = EigenSolver::jacobi;
                        else if (v == "tridiagonal") s = EigenSolver::tridiagonal;
                        else throw BadValue{"expected auto, jacobi or tridiagonal, got '" + v + "'"};
                      },
                      [](const ExperimentConfig& c) {
                        switch (c.study.tracker.policy.solver) {
                          case EigenSolver::jacobi: return std::string("jacobi");
                          case EigenSolver::tridiagonal: return std::string("tridiagonal");
                          default: return std::string("auto");
                        }
                      }});
    f.push_back(integer("editing.refresh_stride", [=](ExperimentConfig& c) -> int& { return tracker(c).refresh_stride; }, 1,
                        100000));

    f.push_back(real("tracker.theta", [=](ExperimentConfig& c) -> double& { return tracker(c).theta; }, -kBig, kInf));
    f.push_back(real("tracker.label_sigma", [=](ExperimentConfig& c) -> double& { return tracker(c).label_sigma; }, 0, kBig));

    f.push_back(integer("study.sequences", [](ExperimentConfig& c) -> int& { return c.study.sequences; }, 1, 1000000));
    f.push_back(seed("study.seed", [](ExperimentConfig& c) -> std::uint64_t& { return c.study.seed; }));
    f.push_back(Field{"study.modes", [](ExperimentConfig& c, const std::string& v) { c.study.modes = parse_modes(v); },
                      [](const ExperimentConfig& c) {
                        std::string out;
                        for (Mode m : c.study.modes) out += (out.empty() ? "" : ",") + std::string(to_string(m));
                        return out;
                      }});
    Field jobs = integer("study.jobs", [](ExperimentConfig& c) -> int& { return c.study.jobs; }, 1, 1024);
    jobs.affects_results = false;
    f.push_back(jobs);

    f.push_back(real("loss.lambda_cls", [](ExperimentConfig& c) -> double& { return c.loss.lambda_cls; }, 0, kBig));
    f.push_back(real("loss.lambda_giou", [](ExperimentConfig& c) -> double& { return c.loss.lambda_giou; }, 0, kBig));

    f.push_back(Field{"output.dir", [](ExperimentConfig& c, const std::string& v) { c.out_dir = v; },
                      [](const ExperimentConfig& c) { return c.out_dir.string(); }, false});
    f.push_back(Field{"output.timings", [](ExperimentConfig& c, const std::string& v) { c.timings = to_bool(v); },
                      [](const ExperimentConfig& c) { return std::string(c.timings ? "true" : "false"); }, false});
    return f;
  }();
  return table;
}

const Field* find_field(const std::string& name) {
  for (const auto& f : fields()) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

}  // namespace

ConfigError::ConfigError(std::string field, int line, const std::string& message)
    : std::runtime_error(message), field_(std::move(field)), line_(line) {}

std::vector<Mode> parse_modes(const std::string& list) {
  std::vector<Mode> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string name = trim(item);
    try {
      const Mode m = parse_mode(name);
      for (Mode seen : out) {
        if (seen == m) throw BadValue{"mode '" + name + "' listed twice"};
      }
      out.push_back(m);
    } catch (const ValidationError&) {
      throw BadValue{"unknown mode '" + name + "' (expected semantic_only, naive_fusion or nullspace_edit)"};
    }
  }
  if (out.empty()) throw BadValue{"at least one mode is required"};
  return out;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw, section;
  std::set<std::string> seen;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    const std::string where = source + ":" + std::to_string(line) + ": ";
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("", line, where + "malformed section header '" + s + "'");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("", line, where + "expected 'key = value', got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string name = section.empty() ? key : section + "." + key;
    const Field* field = find_field(name);
    if (field == nullptr) throw ConfigError(name, line, where + "unknown key '" + name + "'");
    if (!seen.insert(name).second) throw ConfigError(name, line, where + "key '" + name + "' set twice");
    try {
      field->set(cfg, trim(s.substr(eq + 1)));
    } catch (const BadValue& e) {
      throw ConfigError(name, line, where + name + ": " + e.message);
    }
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void set_field(ExperimentConfig& cfg, const std::string& name, const std::string& value) {
  const Field* field = find_field(name);
  if (field == nullptr) throw ConfigError(name, 0, "unknown key '" + name + "'");
  try {
    field->set(cfg, value);
  } catch (const BadValue& e) {
    throw ConfigError(name, 0, name + ": " + e.message);
  }
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) {
    if (f.affects_results) out += f.name + " = " + f.get(cfg) + "\n";
  }
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_config(cfg))));
  return buf;
}

void validate(const ExperimentConfig& cfg) {
  // Core validators lead their messages with the key they reject.
  auto key_of = [](const std::string& msg) {
    const auto sp = msg.find(' ');
    const std::string head = msg.substr(0, sp);
    return find_field(head) != nullptr ? head : std::string();
  };
  try {
    validate(cfg.study.scene);
    validate(cfg.study.tracker);
    if (cfg.params_dir.empty()) validate(cfg.study.model, cfg.study.scene.look, cfg.study.scene.c_sem);
  } catch (const ValidationError& e) {
    throw ConfigError(key_of(e.what()), 0, e.what());
  }
  const auto& look = cfg.study.scene.look;
  if (look.sem_rank > cfg.study.scene.c_sem) {
    throw ConfigError("look.sem_rank", 0, "look.sem_rank must not exceed scene.c_sem");
  }
  if (look.geo_rank > cfg.study.scene.c_geo) {
    throw ConfigError("look.geo_rank", 0, "look.geo_rank must not exceed scene.c_geo");
  }
}

}  // namespace gotedit::cli
