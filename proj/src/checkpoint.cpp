#include "infharm/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "infharm/exceptions.hpp"

namespace infharm {

namespace {

constexpr const char* kMagic = "INFHARM-CHECKPOINT";

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void put_double_le(std::ostream& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int i = 0; i < 8; ++i) {
        bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    }
    out.write(bytes, 8);
}

double get_double_le(std::istream& in) {
    char bytes[8];
    in.read(bytes, 8);
    if (in.gcount() != 8) throw IoError("checkpoint truncated inside the data block");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
    }
    return std::bit_cast<double>(bits);
}

std::string expect_line(std::istream& in, const std::string& label) {
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("checkpoint truncated; missing header line '" + label + "'");
    }
    if (label.empty()) return line;
    if (line.rfind(label + " ", 0) != 0) {
        throw IoError("checkpoint header: expected '" + label + "', got '" + line + "'");
    }
    return line.substr(label.size() + 1);
}

} // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
    if (cp.nodal_values.size() == 0) throw InvalidArgumentError("checkpoint has no data");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());

    out << kMagic << "\n";
    out << "version " << cp.version << "\n";
    out << "experiment " << cp.experiment << "\n";
    out << "n_components " << cp.n_components << "\n";
    out << "mesh_m " << cp.mesh_m << "\n";
    out << "p " << fmt17(cp.p) << "\n";
    out << "newton_iterations " << cp.newton_iterations << "\n";
    out << "final_residual_norm " << fmt17(cp.final_residual_norm) << "\n";
    out << "energy_root " << fmt17(cp.energy_root) << "\n";
    out << "num_vertices " << cp.nodal_values.rows() << "\n";
    out << "data\n";
    for (Eigen::Index v = 0; v < cp.nodal_values.rows(); ++v) {
        for (Eigen::Index c = 0; c < cp.nodal_values.cols(); ++c) {
            put_double_le(out, cp.nodal_values(v, c));
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path.string());

    const std::string magic = expect_line(in, "");
    if (magic != kMagic) throw IoError("not a checkpoint file: " + path.string());

    Checkpoint cp;
    try {
        cp.version = std::stoi(expect_line(in, "version"));
    } catch (const std::exception&) {
        throw IoError("checkpoint version is not an integer");
    }
    if (cp.version != 1) {
        std::ostringstream msg;
        msg << "unsupported checkpoint version " << cp.version;
        throw IoError(msg.str());
    }
    cp.experiment = expect_line(in, "experiment");
    try {
        cp.n_components = std::stoi(expect_line(in, "n_components"));
        cp.mesh_m = std::stoi(expect_line(in, "mesh_m"));
        cp.p = std::stod(expect_line(in, "p"));
        cp.newton_iterations = std::stoi(expect_line(in, "newton_iterations"));
        cp.final_residual_norm = std::stod(expect_line(in, "final_residual_norm"));
        cp.energy_root = std::stod(expect_line(in, "energy_root"));
    } catch (const IoError&) {
        throw;
    } catch (const std::exception&) {
        throw IoError("checkpoint header field is not numeric");
    }
    const std::string nv_line = expect_line(in, "num_vertices");
    long nv = 0;
    try {
        nv = std::stol(nv_line);
    } catch (const std::exception&) {
        throw IoError("checkpoint num_vertices is not an integer");
    }
    if (nv <= 0 || cp.n_components < 1) throw IoError("checkpoint header sizes invalid");
    const std::string data_marker = expect_line(in, "");
    if (data_marker != "data") throw IoError("checkpoint header: expected 'data' marker");

    cp.nodal_values.resize(nv, cp.n_components);
    for (long v = 0; v < nv; ++v) {
        for (int c = 0; c < cp.n_components; ++c) {
            cp.nodal_values(v, c) = get_double_le(in);
        }
    }
    char extra;
    if (in.read(&extra, 1); in.gcount() != 0) {
        throw IoError("checkpoint has trailing bytes after the data block");
    }
    return cp;
}

} // namespace infharm
