// subshape: batch builder, explorer service and synthetic data generator.

#include "subshape/error.hpp"
#include "subshape/export.hpp"
#include "subshape/scene.hpp"
#include "subshape/service.hpp"
#include "subshape/synthetic.hpp"

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace subshape;

namespace {

struct BuildOptions {
  std::string input;
  std::string label_column;
  std::string dims = "0,1,2";
  SceneParams params;
  std::string outliers = "false";
  std::string format = "obj";
  std::string out;
  std::string report;
  std::string dump_fields;
};

std::array<int, 3> parse_dims(const std::string& text) {
  std::array<int, 3> dims{};
  std::stringstream ss(text);
  std::string item;
  std::size_t n = 0;
  while (std::getline(ss, item, ',')) {
    if (n >= 3) throw Error("--dims takes exactly three indices");
    try {
      std::size_t used = 0;
      dims[n] = std::stoi(item, &used);
      if (used != item.size()) throw Error("bad index");
    } catch (const std::exception&) {
      throw Error("--dims index '" + item + "' is not an integer");
    }
    ++n;
  }
  if (n != 3) throw Error("--dims takes exactly three indices");
  return dims;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw Error("expected a boolean, got '" + text + "'");
}

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

nlohmann::json run_report(const SceneState& state, const std::array<int, 3>& dims, const std::vector<fs::path>& files,
                          double load_seconds) {
  const Scene& scene = *state.current;
  nlohmann::json timings{{"load_table", load_seconds}};
  for (const auto& t : scene.timings) timings[t.stage] = t.seconds;
  timings["build_total"] = scene.build_seconds;

  nlohmann::json meshes = nlohmann::json::array();
  for (const auto& m : scene.meshes) {
    const MeshAudit audit = audit_mesh(m);
    double mean_occ = 0.0;
    for (const double o : m.occlusion) mean_occ += o;
    if (!m.occlusion.empty()) mean_occ /= static_cast<double>(m.occlusion.size());
    meshes.push_back({{"name", object_name(m)},
                      {"cluster", m.cluster},
                      {"layer", m.layer},
                      {"iso", m.iso},
                      {"opacity", m.opacity},
                      {"vertices", m.vertices.size()},
                      {"triangles", m.triangles.size()},
                      {"watertight", audit.watertight()},
                      {"degenerate_triangles", audit.degenerate_triangles},
                      {"mean_occlusion", mean_occ}});
  }
  std::vector<int> cluster_sizes(static_cast<std::size_t>(state.data.n_clusters()), 0);
  for (const int l : state.data.labels) ++cluster_sizes[static_cast<std::size_t>(l)];
  std::vector<int> outlier_ids;
  for (const auto p : scene.outliers) outlier_ids.push_back(state.data.point_ids[static_cast<std::size_t>(p)]);
  std::vector<std::string> outputs;
  for (const auto& f : files) outputs.push_back(f.string());

  return {{"points", state.data.n_points()},
          {"dimensions", state.data.n_dims()},
          {"clusters", state.data.n_clusters()},
          {"cluster_sizes", cluster_sizes},
          {"cluster_names", state.data.label_names},
          {"rejected_rows", state.data.rejected_rows},
          {"basis_dims", dims},
          {"grid",
           {{"resolution", {scene.grid.resolution.x(), scene.grid.resolution.y(), scene.grid.resolution.z()}},
            {"spacing", scene.grid.voxel()},
            {"pad_voxels", scene.grid.pad_voxels}}},
          {"timings_seconds", timings},
          {"meshes", meshes},
          {"outlier_count", scene.outliers.size()},
          {"outlier_point_ids", outlier_ids},
          {"outputs", outputs}};
}

int run_build(BuildOptions o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<std::string> label;
  if (!o.label_column.empty()) label = o.label_column;
  Dataset raw = stage("load_table", [&] { return load_table_file(o.input, label); });
  const double load_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  o.params.show_outliers = stage("params", [&] { return parse_bool(o.outliers); });
  o.params.mode = DisplayMode::Shape;
  const ExportFormat format = stage("params", [&] { return parse_export_format(o.format); });
  SceneState state = stage("params", [&] { return make_scene_state(std::move(raw), o.params); });
  const auto dims = stage("axis_basis", [&] { return parse_dims(o.dims); });
  set_basis(state, stage("axis_basis", [&] { return axis_basis<double>(dims[0], dims[1], dims[2], state.data.n_dims()); }));

  build_scene(state);

  fs::path out(o.out);
  if (out.extension() == ".obj" || out.extension() == ".gltf") out.replace_extension();
  const std::vector<ExportFile> files = stage("export_scene", [&] {
    return export_scene(state, format, out.filename().string());
  });
  std::vector<fs::path> written;
  stage("write_output", [&] {
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    for (const auto& f : files) {
      const fs::path path = out.parent_path() / f.name;
      write_file(path, f.bytes);
      written.push_back(path);
    }
    if (!o.dump_fields.empty()) {
      fs::create_directories(o.dump_fields);
      const auto cloud = current_cloud(state);
      const auto grid = box_filter(splat(cloud, state.current->grid), state.params.filter_half_width,
                                   state.params.iterations);
      for (int c = 0; c < grid.n_clusters(); ++c) {
        const fs::path path = fs::path(o.dump_fields) / ("cluster" + std::to_string(c) + ".field");
        std::ofstream dump(path, std::ios::binary);
        write_field_dump(dump, grid, c);
        written.push_back(path);
      }
    }
    return 0;
  });

  const fs::path report = o.report.empty() ? fs::path(out.string() + ".report.json") : fs::path(o.report);
  stage("write_report", [&] {
    write_file(report, run_report(state, dims, written, load_seconds).dump(2) + "\n");
    return 0;
  });
  std::cout << "wrote " << written.size() << " file(s), report " << report.string() << "\n";
  return 0;
}

int run_serve(const std::string& host, int port) {
  Service service;
  httplib::Server server;
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    const ApiResponse r = service.handle(req.method, req.path, req.body, query);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get(R"(/sessions/.*)", forward);
  server.Post(R"(/sessions.*)", forward);
  server.Delete(R"(/sessions/.*)", forward);
  std::cout << "listening on " << host << ":" << port << std::endl;
  if (!server.listen(host, port)) {
    std::cerr << "error [serve]: cannot listen on " << host << ":" << port << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subspace shape builder for cluster-labeled high-dimensional data"};
  app.require_subcommand(1);

  BuildOptions build;
  auto* cmd_build = app.add_subcommand("build", "Build shaded cluster shapes and export them");
  cmd_build->add_option("--input", build.input, "Delimited table with a header row")->required();
  cmd_build->add_option("--label-column", build.label_column, "Column holding cluster labels");
  cmd_build->add_option("--dims", build.dims, "Three attribute indices I,J,K for the axis basis")->capture_default_str();
  cmd_build->add_option("--resolution", build.params.resolution, "Interior cells along the longest axis")->capture_default_str();
  cmd_build->add_option("--filter-half-width", build.params.filter_half_width, "Box filter half-width h")->capture_default_str();
  cmd_build->add_option("--iterations", build.params.iterations, "Box filter passes K")->capture_default_str();
  cmd_build->add_option("--layers", build.params.layers, "Nested iso-surface layers")->capture_default_str();
  cmd_build->add_option("--opacity", build.params.opacity, "Base opacity (presets 1.0, 0.7, 0.5)")->capture_default_str();
  cmd_build->add_option("--tau-out", build.params.tau_out_fraction, "Outer iso as a fraction of the cluster max")->capture_default_str();
  cmd_build->add_option("--ao-dirs", build.params.ao.n_directions, "Occlusion probe directions")->capture_default_str();
  cmd_build->add_option("--outliers", build.outliers, "Include outlier points in the export")->capture_default_str();
  cmd_build->add_option("--format", build.format, "obj or gltf")->capture_default_str();
  cmd_build->add_option("--out", build.out, "Output path stem")->required();
  cmd_build->add_option("--report", build.report, "Run report path (default <out>.report.json)");
  cmd_build->add_option("--dump-fields", build.dump_fields, "Directory for raw density field dumps");

  std::string host = "127.0.0.1";
  int port = 8080;
  auto* cmd_serve = app.add_subcommand("serve", "Serve the session API over HTTP");
  cmd_serve->add_option("--host", host)->capture_default_str();
  cmd_serve->add_option("--port", port)->capture_default_str();

  BlobOptions blobs;
  std::string synth_out;
  auto* cmd_synth = app.add_subcommand("synth", "Write a synthetic Gaussian-cluster table");
  cmd_synth->add_option("--points", blobs.points)->capture_default_str();
  cmd_synth->add_option("--dims", blobs.dims)->capture_default_str();
  cmd_synth->add_option("--clusters", blobs.clusters)->capture_default_str();
  cmd_synth->add_option("--spread", blobs.spread)->capture_default_str();
  cmd_synth->add_option("--outlier-fraction", blobs.outlier_fraction)->capture_default_str();
  cmd_synth->add_option("--seed", blobs.seed)->capture_default_str();
  cmd_synth->add_option("--out", synth_out, "Output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_build) return run_build(build);
    if (*cmd_serve) return run_serve(host, port);
    if (*cmd_synth) {
      write_file(synth_out, to_csv(make_blobs(blobs)));
      return 0;
    }
  } catch (const StageError& e) {
    std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
