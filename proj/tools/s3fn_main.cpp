// s3fn command-line driver: synth, pca, pretrain, fuse, eval, reflectance.
#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "s3fn/config.hpp"
#include "s3fn/cube_io.hpp"
#include "s3fn/error.hpp"
#include "s3fn/pipeline.hpp"
#include "s3fn/synth.hpp"
#include "s3fn/text.hpp"

namespace fs = std::filesystem;
using namespace s3fn;

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct StageFlags {
  std::string manifest;
  std::string mode;
  std::string embeddings;
  std::string split = "test";
  std::vector<std::string> overrides;  // key=value, applied after --config
};

void add_stage_flags(CLI::App* cmd, StageFlags& f, bool with_mode) {
  cmd->add_option("--manifest", f.manifest, "dataset manifest CSV")->required()->check(CLI::ExistingFile);
  if (with_mode) {
    cmd->add_option("--mode", f.mode, "standalone_cnn | label_only | full_s3fn");
    cmd->add_option("--embeddings", f.embeddings, "label embedding file");
  }
  cmd->add_option("--set", f.overrides, "config override key=value (repeatable)");
}

RunConfig resolve_config(const GlobalFlags& g, const StageFlags& f) {
  RunConfig cfg;
  if (!g.config.empty()) cfg = load_run_config(g.config);
  KeyValues kv;
  for (const auto& o : f.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw Error(Errc::config, "--set expects key=value, got '" + o + "'");
    kv.set(std::string(text::trim(o.substr(0, eq))), std::string(text::trim(o.substr(eq + 1))));
  }
  if (!f.mode.empty()) kv.set("mode", f.mode);
  if (!f.embeddings.empty()) kv.set("embeddings", f.embeddings);
  if (g.seed) kv.set("seed", std::to_string(*g.seed));
  apply(cfg, kv);
  return cfg;
}

fs::path require_out(const GlobalFlags& g, std::string_view what) {
  if (g.out.empty()) throw Error(Errc::config, "--out <" + std::string(what) + "> is required");
  return g.out;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"S3FN hyperspectral classification pipeline"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expand help for every subcommand");

  GlobalFlags g;
  app.add_option("--config", g.config, "key=value run config (flags override it)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "global seed");
  app.add_option("--out", g.out, "output directory (bundle) or file");

  std::string spec_path;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--spec", spec_path, "synthetic dataset spec (key=value)")->check(CLI::ExistingFile);

  StageFlags pca_f, pre_f, fuse_f, eval_f;
  auto* pca = app.add_subcommand("pca", "fit PCA on training patches");
  add_stage_flags(pca, pca_f, false);
  auto* pretrain = app.add_subcommand("pretrain", "Stage 1: train the 3D-CNN backbone");
  add_stage_flags(pretrain, pre_f, false);
  auto* fuse = app.add_subcommand("fuse", "Stage 2: train the projection against label embeddings");
  add_stage_flags(fuse, fuse_f, true);
  auto* eval = app.add_subcommand("eval", "classify a split and write reports");
  add_stage_flags(eval, eval_f, true);
  eval->add_option("--split", eval_f.split, "train | test | val");

  std::string cube_path;
  auto* refl = app.add_subcommand("reflectance", "per-band mean reflectance curve of one cube");
  refl->add_option("cube", cube_path, "cube file")->required()->check(CLI::ExistingFile);

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed()) {
      SynthSpec spec = spec_path.empty() ? SynthSpec{} : load_synth_spec(spec_path);
      if (g.seed) spec.seed = *g.seed;
      const auto ds = generate_dataset(spec, require_out(g, "dir"));
      std::cout << "wrote " << ds.manifest.entries.size() << " cubes; manifest " << ds.manifest_path.string() << "\n";
    } else if (pca->parsed()) {
      const auto cfg = resolve_config(g, pca_f);
      const auto st = pipeline::run_pca(pca_f.manifest, require_out(g, "bundle"), cfg);
      std::cout << "C=" << st.pca.bands << " C'=" << st.pca.reduced_bands << "\n";
    } else if (pretrain->parsed()) {
      const auto cfg = resolve_config(g, pre_f);
      const auto r = pipeline::run_pretrain(pre_f.manifest, require_out(g, "bundle"), cfg);
      std::cout << "initial loss " << text::format_double(r.history.initial) << ", final loss "
                << text::format_double(r.history.epochs.empty() ? r.history.initial : r.history.epochs.back())
                << ", train patch accuracy " << text::format_double(r.train_accuracy) << "\n";
    } else if (fuse->parsed()) {
      const auto cfg = resolve_config(g, fuse_f);
      const auto r = pipeline::run_fuse(fuse_f.manifest, require_out(g, "bundle"), cfg);
      print_warnings(r.warnings);
      if (r.skipped) {
        std::cout << "standalone_cnn: no Stage 2 to train\n";
      } else {
        std::cout << "fusion train patch accuracy " << text::format_double(r.fusion->train_accuracy) << "\n";
      }
    } else if (eval->parsed()) {
      const auto cfg = resolve_config(g, eval_f);
      const auto r = pipeline::run_eval(eval_f.manifest, require_out(g, "bundle"), cfg, parse_split(eval_f.split));
      std::cout << format_report(r.report, ReportFormat::text);
    } else if (refl->parsed()) {
      const auto curve = mean_reflectance(load_cube(cube_path));
      write_curve(curve, require_out(g, "csv"));
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
