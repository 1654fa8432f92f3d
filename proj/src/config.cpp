#include "tdsc/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "tdsc/errors.hpp"
#include "tdsc/text.hpp"

namespace tdsc {

namespace {

std::string trim(const std::string& s) {
    const size_t first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const size_t last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0' || errno == ERANGE) {
        throw InvalidConfig(key + ": not a number: '" + value + "'");
    }
    return v;
}

long long to_int(const std::string& key, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0' || errno == ERANGE) {
        throw InvalidConfig(key + ": not an integer: '" + value + "'");
    }
    return v;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw InvalidConfig(key + ": expected true/false, got '" + value + "'");
}

struct KeySpec {
    std::string help;
    std::function<void(TrainConfig&, const std::string&, const std::string&)> assign;
    std::function<std::string(const TrainConfig&)> render;
};

// Single source of truth: parsing, defaults listing and snapshots all walk
// this table, so they cannot drift apart.
const std::map<std::string, KeySpec>& key_table() {
    static const std::map<std::string, KeySpec> table = {
        {"model.input_dim",
         {"input feature dimension; 0 takes it from the data",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              const long long n = to_int(k, v);
              if (n < 0) throw InvalidConfig(k + ": must be >= 0");
              c.dims.input_dim = static_cast<Index>(n);
          },
          [](const TrainConfig& c) { return std::to_string(c.dims.input_dim); }}},
        {"model.hidden_dim",
         {"encoder hidden width",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              const long long n = to_int(k, v);
              if (n < 1) throw InvalidConfig(k + ": must be >= 1");
              c.dims.hidden_dim = static_cast<Index>(n);
          },
          [](const TrainConfig& c) { return std::to_string(c.dims.hidden_dim); }}},
        {"model.output_dim",
         {"head output dimension",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              const long long n = to_int(k, v);
              if (n < 1) throw InvalidConfig(k + ": must be >= 1");
              c.dims.output_dim = static_cast<Index>(n);
          },
          [](const TrainConfig& c) { return std::to_string(c.dims.output_dim); }}},
        {"trainer.T",
         {"training iterations",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              const long long n = to_int(k, v);
              if (n < 1) throw InvalidConfig(k + ": must be >= 1");
              c.total_iters = static_cast<int>(n);
          },
          [](const TrainConfig& c) { return std::to_string(c.total_iters); }}},
        {"trainer.eta",
         {"learning rate",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              const double x = to_double(k, v);
              if (x <= 0.0) throw InvalidConfig(k + ": must be > 0");
              c.eta = x;
          },
          [](const TrainConfig& c) { return format_double(c.eta); }}},
        {"trainer.seed",
         {"seed for parameters and clustering",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              const long long n = to_int(k, v);
              if (n < 0) throw InvalidConfig(k + ": must be >= 0");
              c.seed = static_cast<std::uint64_t>(n);
          },
          [](const TrainConfig& c) { return std::to_string(c.seed); }}},
        {"trainer.log_every",
         {"logging interval in steps",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              const long long n = to_int(k, v);
              if (n < 1) throw InvalidConfig(k + ": must be >= 1");
              c.log_every = static_cast<int>(n);
          },
          [](const TrainConfig& c) { return std::to_string(c.log_every); }}},
        {"trainer.optimizer",
         {"gd (plain gradient descent) or adam",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              if (v == "gd") c.optimizer = Optimizer::gd;
              else if (v == "adam") c.optimizer = Optimizer::adam;
              else throw InvalidConfig(k + ": expected gd or adam, got '" + v + "'");
          },
          [](const TrainConfig& c) {
              return std::string(c.optimizer == Optimizer::gd ? "gd" : "adam");
          }}},
        {"trainer.checkpoint_every",
         {"periodic checkpoint interval; 0 keeps only the final state",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              const long long n = to_int(k, v);
              if (n < 0) throw InvalidConfig(k + ": must be >= 0");
              c.checkpoint_every = static_cast<int>(n);
          },
          [](const TrainConfig& c) { return std::to_string(c.checkpoint_every); }}},
        {"trainer.eval_during_training",
         {"cluster and score at logged steps when labels are present",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              c.eval_during_training = to_bool(k, v);
          },
          [](const TrainConfig& c) {
              return std::string(c.eval_during_training ? "true" : "false");
          }}},
        {"trainer.drop_rho",
         {"ablation: remove the rate term from the objective",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              c.drop_rho = to_bool(k, v);
          },
          [](const TrainConfig& c) { return std::string(c.drop_rho ? "true" : "false"); }}},
        {"trainer.drop_se",
         {"ablation: remove the self-expressive term",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              c.drop_se = to_bool(k, v);
          },
          [](const TrainConfig& c) { return std::string(c.drop_se ? "true" : "false"); }}},
        {"trainer.drop_temporal",
         {"ablation: remove the temporal smoothness term",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              c.drop_temporal = to_bool(k, v);
          },
          [](const TrainConfig& c) {
              return std::string(c.drop_temporal ? "true" : "false");
          }}},
        {"loss.lambda1",
         {"self-expressive residual weight",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              const double x = to_double(k, v);
              if (x < 0.0) throw InvalidConfig(k + ": must be >= 0");
              c.weights.lambda1 = x;
          },
          [](const TrainConfig& c) { return format_double(c.weights.lambda1); }}},
        {"loss.lambda2",
         {"temporal smoothness weight",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              const double x = to_double(k, v);
              if (x < 0.0) throw InvalidConfig(k + ": must be >= 0");
              c.weights.lambda2 = x;
          },
          [](const TrainConfig& c) { return format_double(c.weights.lambda2); }}},
        {"loss.eps",
         {"coding-rate distortion tolerance",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              const double x = to_double(k, v);
              if (x <= 0.0) throw InvalidConfig(k + ": must be > 0");
              c.weights.eps = x;
          },
          [](const TrainConfig& c) { return format_double(c.weights.eps); }}},
        {"affinity.s",
         {"temporal window width for the smoothness graph",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              const long long n = to_int(k, v);
              if (n < 1) throw InvalidConfig(k + ": must be >= 1");
              c.s = static_cast<int>(n);
          },
          [](const TrainConfig& c) { return std::to_string(c.s); }}},
        {"affinity.tau",
         {"coefficient mask band radius",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              const long long n = to_int(k, v);
              if (n < 1) throw InvalidConfig(k + ": must be >= 1");
              c.tau = static_cast<Index>(n);
          },
          [](const TrainConfig& c) { return std::to_string(c.tau); }}},
        {"affinity.alpha0",
         {"initial momentum weight of the coefficient running mean",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              const double x = to_double(k, v);
              if (x <= 0.0 || x > 1.0) throw InvalidConfig(k + ": must be in (0, 1]");
              c.alpha0 = x;
          },
          [](const TrainConfig& c) { return format_double(c.alpha0); }}},
        {"affinity.kappa",
         {"temperature of the exponential lift",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              const double x = to_double(k, v);
              if (x <= 0.0) throw InvalidConfig(k + ": must be > 0");
              c.kappa = x;
          },
          [](const TrainConfig& c) { return format_double(c.kappa); }}},
        {"affinity.sinkhorn_iters",
         {"max alternating normalization sweeps",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              const long long n = to_int(k, v);
              if (n < 1) throw InvalidConfig(k + ": must be >= 1");
              c.sinkhorn_iters = static_cast<int>(n);
          },
          [](const TrainConfig& c) { return std::to_string(c.sinkhorn_iters); }}},
        {"affinity.sinkhorn_tol",
         {"early-stop tolerance on row/col sums; 0 disables",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              const double x = to_double(k, v);
              if (x < 0.0) throw InvalidConfig(k + ": must be >= 0");
              c.sinkhorn_tol = x;
          },
          [](const TrainConfig& c) { return format_double(c.sinkhorn_tol); }}},
        {"affinity.tma_enabled",
         {"blend coefficients into a running mean across steps",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              c.tma_enabled = to_bool(k, v);
          },
          [](const TrainConfig& c) {
              return std::string(c.tma_enabled ? "true" : "false");
          }}},
        {"affinity.tma_grad",
         {"gradient policy through the running mean (current_only)",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              if (v != "current_only") {
                  throw InvalidConfig(k + ": only current_only is implemented, got '" + v + "'");
              }
              c.tma_grad = TmaGrad::current_only;
          },
          [](const TrainConfig&) { return std::string("current_only"); }}},
        {"affinity.masking_enabled",
         {"restrict coefficients to the tau band; false widens to all frames",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              c.masking_enabled = to_bool(k, v);
          },
          [](const TrainConfig& c) {
              return std::string(c.masking_enabled ? "true" : "false");
          }}},
        {"spectral.k",
         {"number of segments / clusters",
          [](TrainConfig& c, const std::string& k, const std::string& v) {
              const long long n = to_int(k, v);
              if (n < 1) throw InvalidConfig(k + ": must be >= 1");
              c.k = static_cast<int>(n);
          },
          [](const TrainConfig& c) { return std::to_string(c.k); }}},
    };
    return table;
}

}  // namespace

ConfigMap parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open config file: " + path);
    ConfigMap map;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidConfig(path + ":" + std::to_string(line_no) +
                                ": expected key=value, got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw InvalidConfig(path + ":" + std::to_string(line_no) + ": empty key");
        }
        map[key] = value;
    }
    return map;
}

void apply_override(ConfigMap& map, const std::string& fragment) {
    const size_t eq = fragment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw InvalidConfig("override must be key=value, got '" + fragment + "'");
    }
    map[trim(fragment.substr(0, eq))] = trim(fragment.substr(eq + 1));
}

TrainConfig train_config_from(const ConfigMap& map) {
    TrainConfig cfg;
    cfg.dims.input_dim = 0;
    const auto& table = key_table();
    for (const auto& [key, value] : map) {
        const auto it = table.find(key);
        if (it == table.end()) throw InvalidConfig("unknown config key: " + key);
        it->second.assign(cfg, key, value);
    }
    return cfg;
}

std::vector<ConfigKeyDoc> config_key_docs() {
    TrainConfig defaults;
    defaults.dims.input_dim = 0;
    std::vector<ConfigKeyDoc> docs;
    for (const auto& [key, spec] : key_table()) {
        docs.push_back({key, spec.render(defaults), spec.help});
    }
    return docs;
}

std::string config_snapshot(const TrainConfig& cfg) {
    std::ostringstream out;
    for (const auto& [key, spec] : key_table()) {
        out << key << '=' << spec.render(cfg) << '\n';
    }
    return out.str();
}

}  // namespace tdsc
