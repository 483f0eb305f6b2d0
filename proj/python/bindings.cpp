#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "terradapt/basis/basis_function.hpp"
#include "terradapt/basis/checkpoint.hpp"
#include "terradapt/common/error.hpp"
#include "terradapt/common/log.hpp"
#include "terradapt/common/math.hpp"
#include "terradapt/control/adaptation.hpp"
#include "terradapt/control/reference.hpp"
#include "terradapt/sim/config.hpp"
#include "terradapt/sim/metrics.hpp"
#include "terradapt/sim/pipeline.hpp"
#include "terradapt/sim/runner.hpp"
#include "terradapt/trainer/dataset.hpp"
#include "terradapt/trainer/meta.hpp"
#include "terradapt/terrain/feature_provider.hpp"
#include "terradapt/vehicle/fault.hpp"
#include "terradapt/vehicle/integrator.hpp"

namespace py = pybind11;
using namespace terradapt;

namespace {

// JSON crosses the boundary as text; the Python wrapper decodes it.
std::string dump(const sim::json& j) { return j.dump(); }

trainer::Trajectory make_trajectory(const MatX& x, const MatX& u, const MatX& e, const MatX& y) {
    return {x, u, e, y};
}

} // namespace

PYBIND11_MODULE(_terradapt, m) {
    m.doc() = "Terrain-adaptive control: plants, terrain, basis nets, meta-training and simulation";

    // Translators run newest first, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def("set_log_level", [](const std::string& level) { set_log_level(level); });
    m.def("wrap_angle", [](double a) { return wrap_angle(a); });
    m.def("version", &sim::code_version);

    // vehicle
    py::class_<vehicle::TrackedParams>(m, "TrackedParams")
        .def(py::init<>())
        .def_readwrite("k1", &vehicle::TrackedParams::k1)
        .def_readwrite("k2", &vehicle::TrackedParams::k2)
        .def_readwrite("tau_v", &vehicle::TrackedParams::tau_v)
        .def_readwrite("tau_omega", &vehicle::TrackedParams::tau_omega)
        .def_readwrite("x_icr", &vehicle::TrackedParams::x_icr)
        .def("a_nominal", &vehicle::TrackedParams::a_nominal)
        .def("b_nominal", &vehicle::TrackedParams::b_nominal);

    py::class_<vehicle::TrackedState>(m, "TrackedState")
        .def(py::init<>())
        .def(py::init([](double px, double py_, double psi, double vx, double w) {
                 return vehicle::TrackedState{px, py_, psi, vx, w};
             }),
             py::arg("p_x") = 0.0, py::arg("p_y") = 0.0, py::arg("psi") = 0.0, py::arg("v_x") = 0.0,
             py::arg("omega") = 0.0)
        .def_readwrite("p_x", &vehicle::TrackedState::p_x)
        .def_readwrite("p_y", &vehicle::TrackedState::p_y)
        .def_readwrite("psi", &vehicle::TrackedState::psi)
        .def_readwrite("v_x", &vehicle::TrackedState::v_x)
        .def_readwrite("omega", &vehicle::TrackedState::omega)
        .def("to_vector", [](const vehicle::TrackedState& s) { return VecX(s.to_vector()); });

    m.def(
        "tracked_derivative",
        [](const vehicle::TrackedState& s, const Vec2& u, const vehicle::TrackedParams& p, const Vec2& eta) {
            return vehicle::tracked_derivative(s, vehicle::TrackedInput::from_vector(u), p, eta).to_vector();
        },
        py::arg("state"), py::arg("u"), py::arg("params"), py::arg("eta") = Vec2::Ones());
    m.def(
        "integrate_tracked",
        [](const vehicle::TrackedState& s, const Vec2& u, const vehicle::TrackedParams& p, const Vec2& eta, double dt) {
            return vehicle::integrate_step(s, vehicle::TrackedInput::from_vector(u), p, eta, dt);
        },
        py::arg("state"), py::arg("u"), py::arg("params"), py::arg("eta") = Vec2::Ones(), py::arg("dt") = 0.01);
    m.def("longitudinal_slip", &vehicle::longitudinal_slip, py::arg("v_x"), py::arg("u_v"), py::arg("v_min") = 0.1);

    py::class_<vehicle::TrackFaultSchedule>(m, "TrackFaultSchedule")
        .def(py::init<>())
        .def_readwrite("left_scale", &vehicle::TrackFaultSchedule::left_scale)
        .def_readwrite("right_scale", &vehicle::TrackFaultSchedule::right_scale)
        .def_readwrite("period", &vehicle::TrackFaultSchedule::period)
        .def_readwrite("duty", &vehicle::TrackFaultSchedule::duty)
        .def_readwrite("track_half_spacing", &vehicle::TrackFaultSchedule::track_half_spacing)
        .def("active_at", &vehicle::TrackFaultSchedule::active_at);
    m.def("apply_track_fault", [](const Vec2& u, const vehicle::TrackFaultSchedule& f, double t) {
        return vehicle::apply_track_fault(vehicle::TrackedInput::from_vector(u), f, t).vector();
    });

    // terrain
    py::class_<terrain::TerrainWorld, std::shared_ptr<terrain::TerrainWorld>>(m, "TerrainWorld")
        .def_property_readonly("rows", &terrain::TerrainWorld::rows)
        .def_property_readonly("cols", &terrain::TerrainWorld::cols)
        .def_property_readonly("cell_size", &terrain::TerrainWorld::cell_size)
        .def_property_readonly("feature_dim", &terrain::TerrainWorld::feature_dim)
        .def_property_readonly("num_classes", &terrain::TerrainWorld::num_classes)
        .def("class_at", &terrain::TerrainWorld::class_at)
        .def("feature_at", [](const terrain::TerrainWorld& w, int r, int c) { return VecX(w.feature_at(r, c)); })
        .def("class_name", [](const terrain::TerrainWorld& w, int id) { return w.terrain_class(id).name; })
        .def("eta_tracked_at", &terrain::TerrainWorld::eta_tracked_at)
        .def("eta_lateral_at", &terrain::TerrainWorld::eta_lateral_at)
        .def("patch_features",
             [](const terrain::TerrainWorld& w, double x, double y, double psi, double offset) {
                 return terrain::patch_mean_features(w, x, y, psi, offset);
             },
             py::arg("p_x"), py::arg("p_y"), py::arg("psi"), py::arg("patch_offset") = 0.3)
        .def(
            "save_grid",
            [](const terrain::TerrainWorld& w, const std::filesystem::path& p, bool features) {
                terrain::write_world_grid(w, p, features);
            },
            py::arg("path"), py::arg("include_features") = true);
    m.def("build_world", [](const std::string& spec_json) {
        return std::make_shared<terrain::TerrainWorld>(terrain::build_world(sim::parse_world(sim::json::parse(spec_json))));
    });
    m.def("read_world_grid", [](const std::filesystem::path& p) {
        return std::make_shared<terrain::TerrainWorld>(terrain::read_world_grid(p));
    });

    // basis
    py::enum_<basis::Activation>(m, "Activation")
        .value("Tanh", basis::Activation::Tanh)
        .value("Identity", basis::Activation::Identity);

    py::class_<basis::BasisShape>(m, "BasisShape")
        .def(py::init([](int n, int mm, int nt) { return basis::BasisShape{n, mm, nt}; }), py::arg("n") = 2,
             py::arg("m") = 2, py::arg("n_theta") = 4)
        .def_readwrite("n", &basis::BasisShape::n)
        .def_readwrite("m", &basis::BasisShape::m)
        .def_readwrite("n_theta", &basis::BasisShape::n_theta);

    py::class_<basis::BasisNet, std::shared_ptr<basis::BasisNet>>(m, "BasisNet")
        .def_static(
            "initialized",
            [](int input_dim, const std::vector<int>& hidden, const basis::BasisShape& s, basis::Activation a,
               std::uint64_t seed) { return std::make_shared<basis::BasisNet>(basis::BasisNet::initialized(input_dim, hidden, s, a, seed)); },
            py::arg("input_dim"), py::arg("hidden"), py::arg("shape") = basis::BasisShape{},
            py::arg("activation") = basis::Activation::Tanh, py::arg("seed") = 0)
        .def_property_readonly("input_dim", &basis::BasisNet::input_dim)
        .def_property_readonly("output_dim", &basis::BasisNet::output_dim)
        .def_property_readonly("shape", &basis::BasisNet::shape)
        .def("forward_flat", &basis::BasisNet::forward_flat)
        .def("forward_batch", [](const basis::BasisNet& n, const MatX& X) { return n.forward_batch(X); })
        .def("components",
             [](const basis::BasisNet& n, const VecX& x, const VecX& e) {
                 const basis::BasisOutput out = n.forward(x, e);
                 std::vector<MatX> c;
                 for (int i = 0; i < out.shape().n_theta; ++i) c.push_back(out.component(i));
                 return c;
             })
        .def("weights",
             [](const basis::BasisNet& n) {
                 std::vector<MatX> w;
                 for (const auto& l : n.layers()) w.push_back(l.W);
                 return w;
             })
        .def("spectral_normalize", &basis::BasisNet::spectral_normalize, py::arg("iterations") = 30,
             py::arg("exact_check") = true)
        .def("parameters", &basis::BasisNet::parameters)
        .def("set_parameters", &basis::BasisNet::set_parameters)
        .def_property_readonly("num_parameters", &basis::BasisNet::num_parameters);

    m.def("save_checkpoint", [](const basis::BasisNet& net, const VecX& theta0, const std::filesystem::path& p) {
        basis::save_checkpoint({net, theta0}, p);
    });
    m.def("load_checkpoint", [](const std::filesystem::path& p) {
        basis::Checkpoint c = basis::load_checkpoint(p);
        return py::make_tuple(std::make_shared<basis::BasisNet>(std::move(c.net)), c.theta0);
    });
    m.def("contract", [](const VecX& flat, const basis::BasisShape& s, const VecX& theta) {
        return basis::contract(basis::BasisOutput(s, flat), theta);
    });
    m.def("spectral_norm", &basis::exact_spectral_norm);

    // trainer
    py::class_<trainer::Trajectory>(m, "Trajectory")
        .def(py::init(&make_trajectory), py::arg("x"), py::arg("u"), py::arg("e"), py::arg("y"))
        .def_readwrite("x", &trainer::Trajectory::x)
        .def_readwrite("u", &trainer::Trajectory::u)
        .def_readwrite("e", &trainer::Trajectory::e)
        .def_readwrite("y", &trainer::Trajectory::y)
        .def_property_readonly("length", &trainer::Trajectory::length);

    py::class_<trainer::Window>(m, "Window")
        .def(py::init([](int traj, int start, int length) { return trainer::Window{traj, start, length}; }),
             py::arg("traj"), py::arg("start"), py::arg("length"))
        .def_readwrite("traj", &trainer::Window::traj)
        .def_readwrite("start", &trainer::Window::start)
        .def_readwrite("length", &trainer::Window::length);

    py::class_<trainer::TrajectoryDataset>(m, "TrajectoryDataset")
        .def(py::init<>())
        .def_readwrite("dt", &trainer::TrajectoryDataset::dt)
        .def_readwrite("state_dim", &trainer::TrajectoryDataset::state_dim)
        .def_readwrite("input_dim", &trainer::TrajectoryDataset::input_dim)
        .def_readwrite("feature_dim", &trainer::TrajectoryDataset::feature_dim)
        .def_readwrite("residual_dim", &trainer::TrajectoryDataset::residual_dim)
        .def_readwrite("trajectories", &trainer::TrajectoryDataset::trajectories)
        .def("total_samples", &trainer::TrajectoryDataset::total_samples);
    m.def("read_dataset", &trainer::read_dataset);
    m.def("write_dataset", &trainer::write_dataset);

    m.def(
        "solve_theta_star",
        [](const basis::BasisNet& net, const trainer::Trajectory& t, const trainer::Window& w, double lambda_r,
           const VecX& theta_r) {
            const trainer::RidgeSolution s = trainer::solve_theta_star(net, t, w, lambda_r, theta_r);
            return py::make_tuple(s.theta, s.cost);
        },
        py::arg("net"), py::arg("trajectory"), py::arg("window"), py::arg("lambda_r"), py::arg("theta_r"));
    m.def(
        "meta_loss",
        [](const basis::BasisNet& net, const trainer::TrajectoryDataset& d, const std::vector<trainer::Window>& ws,
           double lambda_r, const VecX& theta_r) {
            const trainer::MetaLoss ml = trainer::meta_loss(net, d, ws, lambda_r, theta_r, true);
            return py::make_tuple(ml.loss, basis::BasisNet::flatten(ml.grad));
        },
        py::arg("net"), py::arg("dataset"), py::arg("windows"), py::arg("lambda_r"), py::arg("theta_r"));
    m.def(
        "gradcheck_meta",
        [](const basis::BasisNet& net, const trainer::TrajectoryDataset& d, const std::vector<trainer::Window>& ws,
           double lambda_r, const VecX& theta_r, double h) {
            return trainer::gradcheck_meta(net, d, ws, lambda_r, theta_r, h).max_rel_error;
        },
        py::arg("net"), py::arg("dataset"), py::arg("windows"), py::arg("lambda_r"), py::arg("theta_r"),
        py::arg("h") = 1e-5);

    // control
    m.def(
        "adapt_step",
        [](const std::string& law, VecX theta, VecX gamma, MatX Gamma, const VecX& s, const VecX& y, const MatX& H,
           double dt, double lambda, const MatX& R, const MatX& Q, double gamma_min, double gamma_max) {
            control::AdaptConfig c;
            c.law = control::parse_adapt_law(law);
            c.lambda = lambda;
            c.R = R;
            c.Q = Q;
            c.gamma_min = gamma_min;
            c.gamma_max = gamma_max;
            control::AdaptState st;
            st.theta_hat = std::move(theta);
            st.gamma = std::move(gamma);
            st.Gamma = std::move(Gamma);
            const bool ok = control::adapt_step(st, c, s, y, H, dt);
            return py::make_tuple(ok, st.theta_hat, st.gamma, st.Gamma);
        },
        py::arg("law"), py::arg("theta"), py::arg("gamma"), py::arg("Gamma"), py::arg("s"), py::arg("y"),
        py::arg("H"), py::arg("dt"), py::arg("lambda_") = 0.01, py::arg("R"), py::arg("Q"),
        py::arg("gamma_min") = 1e-4, py::arg("gamma_max") = 1e3);
    m.def(
        "reference_velocities",
        [](const Vec2& p, double psi, const Vec2& p_d, const Vec2& v_d, double psi_d, double k_px, double k_py,
           double k_psi, double v_eps) {
            const control::ReferenceState r =
                control::reference_velocities(p, psi, {p_d, v_d, psi_d}, {k_px, k_py, k_psi, v_eps}, 0.0);
            return py::dict(py::arg("v_ref_x") = r.v_ref_x, py::arg("omega_ref") = r.omega_ref,
                            py::arg("psi_ref") = r.psi_ref, py::arg("turn_in_place") = r.turn_in_place);
        },
        py::arg("p"), py::arg("psi"), py::arg("p_d"), py::arg("v_d"), py::arg("psi_d") = 0.0, py::arg("k_px") = 0.8,
        py::arg("k_py") = 0.8, py::arg("k_psi") = 2.3, py::arg("v_eps") = 1e-3);

    // sim
    py::class_<sim::Config>(m, "Config")
        .def_property_readonly("name", [](const sim::Config& c) { return c.scenario.name; })
        .def_property_readonly("output_dir", [](const sim::Config& c) { return c.output_dir; })
        .def_property_readonly("dataset", [](const sim::Config& c) { return c.dataset; })
        .def_property_readonly("checkpoint", [](const sim::Config& c) { return c.checkpoint; })
        .def_property_readonly("raw_json", [](const sim::Config& c) { return dump(c.raw); })
        .def("set_output_dir", [](sim::Config& c, const std::filesystem::path& p) {
            c.output_dir = p;
            c.dataset = p / "dataset.csv";
            c.checkpoint = p / "basis.ckpt";
            c.scenario.checkpoint = c.checkpoint.string();
        });
    m.def("load_config", &sim::load_config);
    m.def("gen_data", [](const sim::Config& c) { return dump(sim::cmd_gen_data(c)); });
    m.def("train", [](const sim::Config& c) { return dump(sim::cmd_train(c)); });
    m.def(
        "simulate", [](const sim::Config& c, const std::vector<std::string>& v) { return dump(sim::cmd_simulate(c, v)); },
        py::arg("config"), py::arg("variants") = std::vector<std::string>{});
    m.def(
        "evaluate",
        [](const sim::Config& c, const std::vector<std::string>& v) { return dump(sim::cmd_evaluate(c, v)); },
        py::arg("config"), py::arg("variants") = std::vector<std::string>{});
    m.def(
        "run_once",
        [](const sim::Config& c, int run, const std::string& variant) {
            std::shared_ptr<const basis::BasisNet> net;
            VecX theta0;
            const sim::Variant v = sim::variant_by_name(variant);
            if (v.use_dnn) {
                basis::Checkpoint ck = basis::load_checkpoint(c.checkpoint);
                net = std::make_shared<const basis::BasisNet>(std::move(ck.net));
                theta0 = ck.theta0;
            }
            const sim::ScenarioRunner runner(c.scenario, sim::make_world(c.scenario), net, theta0);
            const sim::RunResult r = runner.run(run, v, true);
            const auto& rows = r.telemetry.rows();
            MatX table(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(r.telemetry.columns().size()));
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (std::size_t j = 0; j < rows[i].size(); ++j)
                    table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
            return py::make_tuple(dump(sim::run_json(r)), r.telemetry.columns(), table);
        },
        py::arg("config"), py::arg("run"), py::arg("variant"));
}
