#include "fedsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "fedsim/errors.hpp"

namespace fedsim {
namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected integer, got '" + value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected number, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + value + "'");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& value) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        seeds.push_back(static_cast<std::uint64_t>(parse_int(key, item)));
    }
    if (seeds.empty()) throw ConfigError("config key '" + key + "': seed list is empty");
    return seeds;
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "dataset") {
        if (value == "synthetic") cfg.dataset = DataKind::synthetic;
        else if (value == "mnist") cfg.dataset = DataKind::mnist;
        else throw ConfigError("config key 'dataset': expected synthetic|mnist, got '" + value + "'");
    } else if (key == "synthetic.classes") {
        cfg.synthetic.classes = static_cast<int>(parse_int(key, value));
    } else if (key == "synthetic.dim") {
        cfg.synthetic.dim = static_cast<int>(parse_int(key, value));
    } else if (key == "synthetic.per_class") {
        cfg.synthetic.per_class = static_cast<int>(parse_int(key, value));
    } else if (key == "synthetic.test_per_class") {
        cfg.synthetic.test_per_class = static_cast<int>(parse_int(key, value));
    } else if (key == "synthetic.separation") {
        cfg.synthetic.separation = parse_double(key, value);
    } else if (key == "synthetic.seed") {
        cfg.synthetic.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "mnist.train_images") {
        cfg.mnist.train_images = value;
    } else if (key == "mnist.train_labels") {
        cfg.mnist.train_labels = value;
    } else if (key == "mnist.test_images") {
        cfg.mnist.test_images = value;
    } else if (key == "mnist.test_labels") {
        cfg.mnist.test_labels = value;
    } else if (key == "model.kind") {
        if (value == "logistic") cfg.model_kind = ModelKind::logistic;
        else if (value == "mlp") cfg.model_kind = ModelKind::mlp;
        else throw ConfigError("config key 'model.kind': expected logistic|mlp, got '" + value + "'");
    } else if (key == "model.hidden") {
        cfg.hidden_dim = static_cast<int>(parse_int(key, value));
    } else if (key == "model.activation") {
        if (value == "tanh") cfg.activation = Activation::tanh;
        else if (value == "relu") cfg.activation = Activation::relu;
        else throw ConfigError("config key 'model.activation': expected tanh|relu, got '" + value + "'");
    } else if (key == "partition.clients") {
        cfg.clients = static_cast<int>(parse_int(key, value));
    } else if (key == "partition.alpha") {
        cfg.alpha = parse_double(key, value);
    } else if (key == "partition.min_batches") {
        cfg.min_batches = static_cast<int>(parse_int(key, value));
    } else if (key == "seeds") {
        cfg.seeds = parse_seed_list(key, value);
    } else if (key == "algo.name") {
        cfg.algo.algorithm = algorithm_from_name(value);
    } else if (key == "algo.mu") {
        cfg.algo.mu = parse_double(key, value);
    } else if (key == "algo.lr") {
        cfg.algo.lr = parse_double(key, value);
    } else if (key == "algo.lr_decay_every") {
        cfg.algo.lr_decay_every = static_cast<int>(parse_int(key, value));
    } else if (key == "algo.lr_decay_factor") {
        cfg.algo.lr_decay_factor = parse_double(key, value);
    } else if (key == "algo.momentum") {
        cfg.algo.momentum = parse_double(key, value);
    } else if (key == "algo.batch_size") {
        cfg.algo.batch_size = static_cast<int>(parse_int(key, value));
    } else if (key == "algo.rounds") {
        cfg.algo.rounds = static_cast<int>(parse_int(key, value));
    } else if (key == "ecgr.enabled") {
        cfg.algo.ecgr_enabled = parse_bool(key, value);
    } else if (key == "ecgr.beta") {
        cfg.algo.beta = parse_double(key, value);
    } else if (key == "run.paired") {
        cfg.paired = parse_bool(key, value);
    } else if (key == "run.audit") {
        cfg.audit = parse_bool(key, value);
    } else if (key == "run.audit_every") {
        cfg.audit_every = static_cast<int>(parse_int(key, value));
    } else if (key == "run.parallel") {
        cfg.parallel = parse_bool(key, value);
    } else if (key == "out") {
        cfg.out_dir = value;
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

void validate(const RunConfig& cfg) {
    auto fail = [](const std::string& key, const std::string& why) {
        throw ConfigError("config key '" + key + "': " + why);
    };

    if (cfg.synthetic.classes < 1) fail("synthetic.classes", "must be >= 1");
    if (cfg.synthetic.dim < 1) fail("synthetic.dim", "must be >= 1");
    if (cfg.synthetic.per_class < 1) fail("synthetic.per_class", "must be >= 1");
    if (cfg.synthetic.test_per_class < 1) fail("synthetic.test_per_class", "must be >= 1");
    if (cfg.synthetic.separation < 0.0) fail("synthetic.separation", "must be >= 0");
    if (cfg.dataset == DataKind::mnist &&
        (cfg.mnist.train_images.empty() || cfg.mnist.train_labels.empty() ||
         cfg.mnist.test_images.empty() || cfg.mnist.test_labels.empty())) {
        fail("mnist.*", "all four IDX paths are required for dataset=mnist");
    }
    if (cfg.model_kind == ModelKind::mlp && cfg.hidden_dim < 1) {
        fail("model.hidden", "mlp requires a positive hidden size");
    }
    if (cfg.model_kind == ModelKind::logistic && cfg.hidden_dim != 0) {
        fail("model.hidden", "logistic model takes no hidden layer");
    }
    if (cfg.clients < 1) fail("partition.clients", "must be >= 1");
    if (!(cfg.alpha > 0.0)) fail("partition.alpha", "must be > 0");
    if (cfg.min_batches < 1) fail("partition.min_batches", "must be >= 1");
    if (cfg.algo.beta < 0.0 || cfg.algo.beta > 1.0) fail("ecgr.beta", "must be in [0,1]");
    if (cfg.algo.algorithm == Algorithm::fedprox && !(cfg.algo.mu > 0.0)) {
        fail("algo.mu", "fedprox requires mu > 0");
    }
    if (cfg.algo.algorithm != Algorithm::fedprox && cfg.algo.mu != 0.0) {
        fail("algo.mu", "mu is only meaningful for fedprox");
    }
    if (!(cfg.algo.lr > 0.0)) fail("algo.lr", "must be > 0");
    if (cfg.algo.lr_decay_every < 1) fail("algo.lr_decay_every", "must be >= 1");
    if (!(cfg.algo.lr_decay_factor > 0.0) || cfg.algo.lr_decay_factor > 1.0) {
        fail("algo.lr_decay_factor", "must be in (0,1]");
    }
    if (cfg.algo.momentum < 0.0 || cfg.algo.momentum >= 1.0) {
        fail("algo.momentum", "must be in [0,1)");
    }
    if (cfg.algo.batch_size < 1) fail("algo.batch_size", "must be >= 1");
    if (cfg.algo.rounds < 0) fail("algo.rounds", "must be >= 0");
    if (cfg.audit_every < 1) fail("run.audit_every", "must be >= 1");
    if (cfg.seeds.empty()) fail("seeds", "must not be empty");
}

} // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        }
        apply_key(cfg, key, value);
    }
    validate(cfg);
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str());
}

ModelSpec resolve_model_spec(const RunConfig& cfg, const Dataset& train) {
    ModelSpec spec;
    spec.kind = cfg.model_kind;
    spec.input_dim = train.dim();
    spec.hidden_dim = cfg.hidden_dim;
    spec.num_classes = train.num_classes;
    spec.activation = cfg.activation;
    return spec;
}

} // namespace fedsim
