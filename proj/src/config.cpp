#include "infharm/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "infharm/exceptions.hpp"

namespace infharm {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> items;
    std::stringstream stream(s);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t consumed = 0;
        const double x = std::stod(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument(value);
        return x;
    } catch (const std::exception&) {
        throw InvalidArgumentError("config: key '" + key + "' expects a number, got '" + value + "'");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        size_t consumed = 0;
        const int x = std::stoi(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument(value);
        return x;
    } catch (const std::exception&) {
        throw InvalidArgumentError("config: key '" + key + "' expects an integer, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    std::string v = value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw InvalidArgumentError("config: key '" + key + "' expects a boolean, got '" + value + "'");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const std::string& item : split_list(value)) out.push_back(parse_double(key, item));
    if (out.empty()) throw InvalidArgumentError("config: key '" + key + "' expects a nonempty list");
    return out;
}

} // namespace

std::vector<double> default_contour_levels() {
    std::vector<double> levels;
    levels.reserve(41);
    for (int i = -20; i <= 20; ++i) levels.push_back(0.05 * i);
    return levels;
}

std::vector<double> geometric_schedule(double p_max) {
    if (!(p_max >= 2.0)) throw InvalidArgumentError("geometric_schedule: p_max must be >= 2");
    std::vector<double> schedule;
    for (double p : default_p_schedule()) {
        if (p <= p_max) schedule.push_back(p);
    }
    if (schedule.empty() || schedule.back() != p_max) schedule.push_back(p_max);
    return schedule;
}

std::vector<double> plusone_schedule(double p_max) {
    if (!(p_max >= 2.0)) throw InvalidArgumentError("plusone_schedule: p_max must be >= 2");
    std::vector<double> schedule;
    for (double p = 2.0; p <= p_max; p += 1.0) schedule.push_back(p);
    if (schedule.back() != p_max) schedule.push_back(p_max);
    return schedule;
}

std::vector<double> RunConfig::resolved_schedule() const {
    if (schedule_mode == "explicit") return solver.p_schedule;
    if (schedule_mode == "geometric") return geometric_schedule(p_max);
    if (schedule_mode == "plusone") return plusone_schedule(p_max);
    throw InvalidArgumentError("config: unknown schedule_mode '" + schedule_mode + "'");
}

void RunConfig::validate() const {
    if (mesh_m < 2) throw InvalidArgumentError("config: mesh_m must be >= 2");
    if (!(analysis.tau > 0.0)) throw InvalidArgumentError("config: tau must be positive");
    if (!(analysis.quad_tol > 0.0)) throw InvalidArgumentError("config: quad_tol must be positive");
    const std::vector<double>& levels =
        analysis.contour_levels.empty() ? default_contour_levels() : analysis.contour_levels;
    for (size_t i = 1; i < levels.size(); ++i) {
        if (!(levels[i] > levels[i - 1])) {
            throw InvalidArgumentError("config: contour_levels must be strictly increasing");
        }
    }
    for (const std::string& kind : emit) {
        if (kind != "csv" && kind != "vtk" && kind != "svg" && kind != "checkpoints") {
            throw InvalidArgumentError("config: unknown emit kind '" + kind + "'");
        }
    }
    const std::vector<double> schedule = resolved_schedule();
    if (schedule.empty()) throw InvalidArgumentError("config: empty p schedule");
    if (schedule.front() != 2.0) throw InvalidArgumentError("config: p schedule must start at 2");
    for (size_t i = 1; i < schedule.size(); ++i) {
        if (!(schedule[i] > schedule[i - 1])) {
            throw InvalidArgumentError("config: p schedule must be strictly increasing");
        }
    }
    if (experiment == "custom" && custom_boundary_file.empty()) {
        throw InvalidArgumentError("config: experiment 'custom' needs custom_boundary_file");
    }
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
    if (key == "experiment") {
        config.experiment = value;
    } else if (key == "mesh_m") {
        config.mesh_m = parse_int(key, value);
    } else if (key == "output_dir") {
        config.output_dir = value;
    } else if (key == "emit") {
        config.emit.clear();
        for (const std::string& kind : split_list(value)) config.emit.insert(kind);
    } else if (key == "smoothed_box") {
        config.smoothed_box = parse_bool(key, value);
    } else if (key == "custom_boundary_file") {
        config.custom_boundary_file = value;
    } else if (key == "schedule_mode") {
        if (value != "geometric" && value != "plusone" && value != "explicit") {
            throw InvalidArgumentError("config: schedule_mode must be geometric, plusone or explicit");
        }
        config.schedule_mode = value;
    } else if (key == "p_max") {
        config.p_max = parse_double(key, value);
    } else if (key == "p_schedule") {
        config.solver.p_schedule = parse_double_list(key, value);
        config.schedule_mode = "explicit";
    } else if (key == "newton_tol") {
        config.solver.newton_tol = parse_double(key, value);
    } else if (key == "newton_max_iter") {
        config.solver.newton_max_iter = parse_int(key, value);
    } else if (key == "linear_tol") {
        config.solver.linear_tol = parse_double(key, value);
    } else if (key == "epsilon") {
        config.solver.epsilon = parse_double(key, value);
    } else if (key == "tau") {
        config.analysis.tau = parse_double(key, value);
    } else if (key == "quad_tol") {
        config.analysis.quad_tol = parse_double(key, value);
    } else if (key == "contour_levels") {
        config.analysis.contour_levels = parse_double_list(key, value);
    } else {
        throw InvalidArgumentError("config: unknown key '" + key + "'");
    }
}

void load_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path.string());
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidArgumentError("config: " + path.string() + " line " +
                                       std::to_string(line_number) + " is not key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw InvalidArgumentError("config: " + path.string() + " line " +
                                       std::to_string(line_number) + " has an empty key");
        }
        apply_setting(config, key, value);
    }
}

} // namespace infharm
