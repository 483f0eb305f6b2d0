#include "terradapt/trainer/dataset.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace terradapt::trainer {

void TrajectoryDataset::validate() const {
    if (!(dt > 0.0)) throw ConfigError("dataset dt must be positive");
    if (trajectories.empty()) throw ConfigError("dataset has no trajectories");
    for (std::size_t n = 0; n < trajectories.size(); ++n) {
        const Trajectory& t = trajectories[n];
        const auto len = t.x.cols();
        if (len == 0) throw ConfigError("trajectory " + std::to_string(n) + " is empty");
        if (t.x.rows() != state_dim || t.u.rows() != input_dim || t.e.rows() != feature_dim
            || t.y.rows() != residual_dim)
            throw DimensionError("trajectory " + std::to_string(n) + " has inconsistent row dimensions");
        if (t.u.cols() != len || t.e.cols() != len || t.y.cols() != len)
            throw DimensionError("trajectory " + std::to_string(n) + " has inconsistent lengths");
        if (!t.x.allFinite() || !t.u.allFinite() || !t.e.allFinite() || !t.y.allFinite())
            throw NumericalError("trajectory " + std::to_string(n) + " contains non-finite records");
    }
}

std::size_t TrajectoryDataset::total_samples() const {
    std::size_t n = 0;
    for (const auto& t : trajectories) n += static_cast<std::size_t>(t.length());
    return n;
}

void write_dataset(const TrajectoryDataset& data, const std::filesystem::path& path) {
    data.validate();
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    std::fprintf(f, "# terradapt-dataset 1\n");
    std::fprintf(f, "# dt %.17g\n", data.dt);
    std::fprintf(f, "# dims %d %d %d %d\n", data.state_dim, data.input_dim, data.feature_dim, data.residual_dim);
    std::fprintf(f, "# trajectories %zu\n", data.trajectories.size());
    std::string meta = data.metadata;
    for (char& c : meta)
        if (c == '\n') c = ' ';
    std::fprintf(f, "# meta %s\n", meta.c_str());
    std::fprintf(f, "traj,t");
    for (int i = 0; i < data.state_dim; ++i) std::fprintf(f, ",x%d", i);
    for (int i = 0; i < data.input_dim; ++i) std::fprintf(f, ",u%d", i);
    for (int i = 0; i < data.feature_dim; ++i) std::fprintf(f, ",e%d", i);
    for (int i = 0; i < data.residual_dim; ++i) std::fprintf(f, ",y%d", i);
    std::fprintf(f, "\n");
    for (std::size_t n = 0; n < data.trajectories.size(); ++n) {
        const Trajectory& t = data.trajectories[n];
        for (int s = 0; s < t.length(); ++s) {
            std::fprintf(f, "%zu,%d", n, s);
            for (const MatX* m : {&t.x, &t.u, &t.e, &t.y})
                for (Eigen::Index i = 0; i < m->rows(); ++i) std::fprintf(f, ",%.17g", (*m)(i, s));
            std::fprintf(f, "\n");
        }
    }
    const bool ok = std::ferror(f) == 0;
    std::fclose(f);
    if (!ok) throw IoError("failed writing " + path.string());
}

TrajectoryDataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset " + path.string());
    TrajectoryDataset data;
    std::string line;
    std::size_t n_traj = 0;
    bool magic = false;
    bool columns = false;
    while (!columns && std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            std::istringstream ss(line.substr(2));
            std::string key;
            ss >> key;
            if (key == "terradapt-dataset") {
                int v = 0;
                ss >> v;
                if (v != 1) throw IoError(path.string() + ": unsupported dataset version");
                magic = true;
            } else if (key == "dt") {
                ss >> data.dt;
            } else if (key == "dims") {
                ss >> data.state_dim >> data.input_dim >> data.feature_dim >> data.residual_dim;
            } else if (key == "trajectories") {
                ss >> n_traj;
            } else if (key == "meta") {
                data.metadata = line.size() > 7 ? line.substr(7) : "";
            }
        } else {
            columns = true;  // column header row
        }
    }
    if (!magic || !columns) throw IoError(path.string() + ": not a terradapt dataset");
    if (n_traj == 0 || n_traj > 1000000) throw IoError(path.string() + ": bad trajectory count");

    const int width = data.state_dim + data.input_dim + data.feature_dim + data.residual_dim;
    std::vector<std::vector<std::vector<double>>> rows(n_traj);
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const char* p = line.c_str();
        char* end = nullptr;
        const long traj = std::strtol(p, &end, 10);
        if (*end != ',' || traj < 0 || static_cast<std::size_t>(traj) >= n_traj)
            throw IoError(path.string() + ": bad trajectory index on data line " + std::to_string(lineno));
        p = end + 1;
        (void)std::strtol(p, &end, 10);
        std::vector<double> vals(static_cast<std::size_t>(width));
        for (int i = 0; i < width; ++i) {
            if (*end != ',') throw IoError(path.string() + ": short row on data line " + std::to_string(lineno));
            p = end + 1;
            vals[static_cast<std::size_t>(i)] = std::strtod(p, &end);
            if (end == p) throw IoError(path.string() + ": bad number on data line " + std::to_string(lineno));
        }
        rows[static_cast<std::size_t>(traj)].push_back(std::move(vals));
    }
    for (auto& r : rows) {
        Trajectory t;
        const auto len = static_cast<Eigen::Index>(r.size());
        t.x.resize(data.state_dim, len);
        t.u.resize(data.input_dim, len);
        t.e.resize(data.feature_dim, len);
        t.y.resize(data.residual_dim, len);
        for (Eigen::Index s = 0; s < len; ++s) {
            const auto& v = r[static_cast<std::size_t>(s)];
            int o = 0;
            for (MatX* m : {&t.x, &t.u, &t.e, &t.y})
                for (Eigen::Index i = 0; i < m->rows(); ++i) (*m)(i, s) = v[static_cast<std::size_t>(o++)];
        }
        data.trajectories.push_back(std::move(t));
    }
    data.validate();
    return data;
}

} // namespace terradapt::trainer
