#include "bnvc/cli.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "bnvc/codec.h"
#include "bnvc/error.h"
#include "bnvc/frame_io.h"
#include "bnvc/grad_suite.h"
#include "bnvc/loss_model.h"
#include "bnvc/metrics.h"
#include "bnvc/synth.h"
#include "bnvc/train.h"

namespace bnvc {

namespace {

using nlohmann::json;

// Flat or nested JSON objects; "a.b" and {"a": {"b": ...}} are equivalent.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App *app, bool default_also, bool, std::string prefix) const override {
    json j = json::object();
    for (const CLI::Option *o : app->get_options()) {
      if (!o->get_configurable() || o->get_lnames().empty()) continue;
      auto r = o->reduced_results();
      if (!r.empty()) {
        j[prefix + o->get_lnames()[0]] = r.size() == 1 ? json(r[0]) : json(r);
      } else if (default_also && !o->get_default_str().empty()) {
        j[prefix + o->get_lnames()[0]] = o->get_default_str();
      }
    }
    return j.dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream &in) const override {
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw CLI::ConfigError("config file is not a JSON object");
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static void flatten(const json &j, std::vector<std::string> parents, std::vector<CLI::ConfigItem> &out) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      std::vector<std::string> path = parents;
      std::stringstream key(it.key());
      std::string part;
      while (std::getline(key, part, '.')) path.push_back(part);
      if (path.empty()) throw CLI::ConfigError("empty config key");
      if (it->is_object()) {
        flatten(*it, path, out);
        continue;
      }
      CLI::ConfigItem item;
      item.name = path.back();
      path.pop_back();
      item.parents = path;
      if (it->is_array()) {
        for (const json &v : *it) item.inputs.push_back(scalar(v, it.key()));
      } else if (!it->is_null()) {
        item.inputs.push_back(scalar(*it, it.key()));
      }
      out.push_back(std::move(item));
    }
  }

  static std::string scalar(const json &v, const std::string &key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConfigError("config key '" + key + "' must hold a scalar or a list of scalars");
  }
};

json option_values(const CLI::App &app, const std::string &prefix) {
  json j = json::object();
  for (const CLI::Option *o : app.get_options()) {
    if (o->get_lnames().empty()) continue;
    const std::string name = o->get_lnames()[0];
    if (name == "help" || name == "config") continue;
    auto r = o->reduced_results();
    if (!r.empty()) {
      j[prefix + name] = r.size() == 1 ? json(r[0]) : json(r);
    } else {
      j[prefix + name] = o->get_default_str();
    }
  }
  return j;
}

json provenance(const CLI::App &app, const CLI::App &sub) {
  json j = option_values(app, "");
  j.update(option_values(sub, sub.get_name() + "."));
  return j;
}

std::string provenance_line(const CLI::App &app, const CLI::App &sub) {
  return "# bnvc " + sub.get_name() + " " + provenance(app, sub).dump() + "\n";
}

ModelConfig seeded_config(const RunConfig &rc, int n_ref, FusionMode fusion) {
  ModelConfig c = rc.model == "toy" ? ModelConfig::toy() : ModelConfig{};
  c.n_ref = n_ref;
  c.fusion = fusion;
  return c;
}

struct Shared {
  RunConfig rc;
  CLI::Option *policy = nullptr;
  CLI::Option *fusion = nullptr;
  CLI::Option *lambda = nullptr;
  CLI::Option *nref = nullptr;
};

Model load_or_seed(const std::string &weights, const Shared &s) {
  if (weights.empty()) {
    return Model::seeded(seeded_config(s.rc, s.rc.n_ref, parse_fusion_mode(s.rc.fusion)), s.rc.seed,
                         s.rc.lambda_index);
  }
  Model m = Model::load(weights);
  if (s.nref->count() && m.config.n_ref != s.rc.n_ref) {
    throw UsageError("--nref " + std::to_string(s.rc.n_ref) + " conflicts with weights (" +
                     std::to_string(m.config.n_ref) + ")");
  }
  if (s.fusion->count() && m.config.fusion != parse_fusion_mode(s.rc.fusion)) {
    throw UsageError("--fusion " + s.rc.fusion + " conflicts with weights (" + to_string(m.config.fusion) + ")");
  }
  if (s.lambda->count() && m.lambda_index != s.rc.lambda_index) {
    throw UsageError("--lambda-index " + std::to_string(s.rc.lambda_index) + " conflicts with weights (" +
                     std::to_string(m.lambda_index) + ")");
  }
  return m;
}

CodingSettings settings_of(const RunConfig &rc) {
  CodingSettings cs;
  cs.policy = parse_policy(rc.policy);
  cs.intra_period = rc.intra_period;
  return cs;
}

bool same_tensor(const std::optional<Tensor> &a, const std::optional<Tensor> &b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->shape() == b->shape() &&
         std::memcmp(a->data().data(), b->data().data(), a->size() * sizeof(double)) == 0;
}

void emit(const std::string &path, const std::string &text, std::ostream &out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write " + path);
  f << text;
}

std::string fmt(double v, int prec = 10) {
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

}  // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Learned low-delay video codec with multi-reference context fusion", "bnvc"};
  app.option_defaults()->always_capture_default();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  Shared s;
  RunConfig &rc = s.rc;
  app.set_config("--config", "", "JSON config file with flat dotted keys; flags take precedence");
  s.policy = app.add_option("--policy", rc.policy, "Decoded-buffer padding: near | further")
                 ->check(CLI::IsMember({"near", "further"}));
  s.fusion = app.add_option("--fusion", rc.fusion, "Context fusion: butterfly | together | independent")
                 ->check(CLI::IsMember({"butterfly", "together", "independent"}));
  s.lambda = app.add_option("--lambda-index", rc.lambda_index, "Rate point 0..3 (lambda 256..2048)")
                 ->check(CLI::Range(0, 3));
  app.add_option("--intra-period", rc.intra_period, "Frames per intra period")->check(CLI::Range(1, 65535));
  app.add_option("--seed", rc.seed, "Seed for data generation and seeded weights");
  s.nref = app.add_option("--nref", rc.n_ref, "Reference frames per P-frame")->check(CLI::Range(1, 255));
  app.add_option("--model", rc.model, "Widths of seeded models: full | toy")
      ->check(CLI::IsMember({"full", "toy"}));

  auto sub = [&](const char *name, const char *desc) {
    CLI::App *c = app.add_subcommand(name, desc);
    c->fallthrough();
    return c;
  };

  // encode / decode / roundtrip-check
  std::string input, output, weights, recon;
  CLI::App *enc = sub("encode", "Encode a frame sequence into a bitstream");
  enc->add_option("-i,--input", input, "PPM directory or .rgb file")->required();
  enc->add_option("-o,--output", output, "Bitstream path")->required();
  enc->add_option("-w,--weights", weights, "Trained weights (default: seeded)");
  enc->add_option("--recon", recon, "Also write encoder-side reconstructions");

  CLI::App *dec = sub("decode", "Decode a bitstream into frames");
  dec->add_option("-i,--input", input, "Bitstream path")->required();
  dec->add_option("-o,--output", output, "PPM directory or .rgb file")->required();
  dec->add_option("-w,--weights", weights, "Trained weights (default: seeded)");

  CLI::App *rt = sub("roundtrip-check", "Encode, decode and compare reconstructions bit for bit");
  rt->add_option("-i,--input", input, "PPM directory or .rgb file")->required();
  rt->add_option("-w,--weights", weights, "Trained weights (default: seeded)");

  // train-toy
  int steps = 2000, sequences = 16, frames = 12, size = 16, rollout = 4;
  double lr = 1e-3;
  bool occlusion = false;
  std::string log_path;
  CLI::App *tr = sub("train-toy", "Train a small model on synthetic sequences");
  tr->add_option("-o,--output", output, "Weights path")->required();
  tr->add_option("--steps", steps, "Optimizer steps")->check(CLI::NonNegativeNumber);
  tr->add_option("--lr", lr, "Adam learning rate")->check(CLI::PositiveNumber);
  tr->add_option("--sequences", sequences, "Training sequences")->check(CLI::PositiveNumber);
  tr->add_option("--frames", frames, "Frames per training sequence")->check(CLI::Range(2, 10000));
  tr->add_option("--size", size, "Frame width and height")->check(CLI::Range(8, 4096));
  tr->add_option("--rollout", rollout, "P-frames per training window")->check(CLI::Range(1, 64));
  tr->add_flag("--occlusion", occlusion, "Use the occlusion suite");
  tr->add_option("--log", log_path, "Write the per-step training log as CSV");

  // gen-synth
  SynthConfig sc;
  int count = 1;
  CLI::App *gs = sub("gen-synth", "Write seeded synthetic moving-rectangle sequences");
  gs->add_option("-o,--output", output, "PPM directory or .rgb file")->required();
  gs->add_option("--width", sc.width)->check(CLI::Range(1, 65535));
  gs->add_option("--height", sc.height)->check(CLI::Range(1, 65535));
  gs->add_option("--frames", sc.frames)->check(CLI::Range(1, 100000));
  gs->add_option("--objects", sc.objects)->check(CLI::Range(0, 64));
  gs->add_flag("--occlusion", sc.occlusion, "Show a textured patch only on every period-th frame");
  gs->add_option("--occlusion-period", sc.occlusion_period)->check(CLI::Range(1, 1000));
  gs->add_flag("--static", sc.static_scene, "Repeat the first frame");
  gs->add_option("--count", count, "Sequences; more than one writes seq_NNN under --output")
      ->check(CLI::Range(1, 10000));

  // loss-model
  double alpha = 0.5, beta = 0.5;
  int grid = 0, lm_frames = 4;
  CLI::App *lm = sub("loss-model", "Error-accumulation totals, threshold and policy grid");
  CLI::Option *alpha_opt = lm->add_option("--alpha", alpha, "Per-frame loss growth")->check(CLI::NonNegativeNumber);
  CLI::Option *beta_opt = lm->add_option("--beta", beta, "Adjacent-frame correlation in (0, 1)");
  lm->add_option("--frames", lm_frames, "P-frames in the period")->check(CLI::Range(1, 10000));
  CLI::Option *grid_opt = lm->add_option("--grid", grid, "Emit an N x N policy grid over (0, 1)^2 as CSV")
                              ->check(CLI::Range(1, 10000));
  lm->add_option("-o,--output", output, "CSV path (default stdout)");
  grid_opt->excludes(alpha_opt)->excludes(beta_opt);

  // bdrate
  std::string anchor, test;
  CLI::App *bd = sub("bdrate", "BD-rate of a test RD curve against an anchor");
  bd->add_option("--anchor", anchor, "CSV with bpp,psnr rows")->required();
  bd->add_option("--test", test, "CSV with bpp,psnr rows")->required();

  // report
  std::vector<std::string> inputs, weight_list;
  std::string baseline_policy;
  CLI::App *rp = sub("report", "Encode sequences at every rate point and tabulate bpp / PSNR");
  rp->add_option("-i,--input", inputs, "Sequences (repeatable)")->required();
  rp->add_option("-w,--weights", weight_list, "One weights file per rate point (default: seeded, all four)");
  rp->add_option("--baseline-policy", baseline_policy, "Also code with this policy and report BD-rate against it")
      ->check(CLI::IsMember({"near", "further"}));
  rp->add_option("-o,--output", output, "CSV path (default stdout)");

  // grad-check
  int gc_seeds = 3;
  bool gc_ops_only = false;
  CLI::App *gc = sub("grad-check", "Finite-difference gradient checks");
  gc->add_option("--seeds", gc_seeds, "Repetitions per op")->check(CLI::Range(1, 1000));
  gc->add_flag("--ops-only", gc_ops_only, "Skip the fusion and full P-frame checks");

  std::vector<const char *> argv{"bnvc"};
  for (const std::string &a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    app.exit(e, out, err);
    err << app.help();
    return 1;
  }

  const CLI::App &active = *app.get_subcommands().front();
  rc.subcommand = active.get_name();
  try {
    if (enc->parsed()) {
      Model m = load_or_seed(weights, s);
      std::vector<Image> seq = read_sequence(input);
      EncodeResult r = encode_sequence(seq, m, settings_of(rc));
      write_file(output, r.bytes);
      if (!recon.empty()) {
        std::vector<Image> pics;
        for (const Frame &f : r.recon) pics.push_back(f.pixels);
        write_sequence(recon, pics);
      }
      err << "encoded " << seq.size() << " frames, " << r.bytes.size() << " bytes, " << fmt(r.bpp, 6)
          << " bpp\n";
    } else if (dec->parsed()) {
      std::vector<std::uint8_t> bytes = read_file(input);
      Model m;
      if (weights.empty()) {
        const SequenceHeader h = parse_bitstream(bytes).header;
        if (s.nref->count() && rc.n_ref != h.n_ref) throw UsageError("--nref conflicts with the bitstream");
        m = Model::seeded(seeded_config(rc, h.n_ref, h.fusion), rc.seed, h.lambda_index);
      } else {
        m = load_or_seed(weights, s);
      }
      DecodeOptions opt;
      if (s.policy->count()) opt.expect_policy = parse_policy(rc.policy);
      std::vector<Frame> dec_frames = decode_sequence(bytes, m, opt);
      std::vector<Image> pics;
      for (const Frame &f : dec_frames) pics.push_back(f.pixels);
      write_sequence(output, pics);
      err << "decoded " << pics.size() << " frames\n";
    } else if (rt->parsed()) {
      Model m = load_or_seed(weights, s);
      std::vector<Image> seq = read_sequence(input);
      EncodeResult r = encode_sequence(seq, m, settings_of(rc));
      DecodeOptions opt;
      opt.expect_policy = parse_policy(rc.policy);
      std::vector<Frame> back = decode_sequence(r.bytes, m, opt);
      if (back.size() != r.recon.size()) {
        err << "MISMATCH: decoded " << back.size() << " of " << r.recon.size() << " frames\n";
        return 2;
      }
      for (std::size_t t = 0; t < back.size(); ++t) {
        if (!(back[t].pixels == r.recon[t].pixels) || !same_tensor(back[t].feature, r.recon[t].feature) ||
            !same_tensor(back[t].flow, r.recon[t].flow)) {
          err << "MISMATCH at frame " << t << "\n";
          return 2;
        }
      }
      out << "OK, drift-free, " << back.size() << " frames\n";
      err << r.bytes.size() << " bytes, " << fmt(r.bpp, 6) << " bpp\n";
    } else if (tr->parsed()) {
      SynthConfig dc;
      dc.width = dc.height = size;
      dc.frames = frames;
      dc.occlusion = occlusion;
      auto data = generate_dataset(dc, sequences, rc.seed);
      TrainConfig tc;
      tc.model = ModelConfig::toy();
      tc.model.n_ref = rc.n_ref;
      tc.model.fusion = parse_fusion_mode(rc.fusion);
      tc.lambda_index = rc.lambda_index;
      tc.steps = steps;
      tc.seed = rc.seed;
      tc.rollout = rollout;
      tc.policy = parse_policy(rc.policy);
      tc.adam.learning_rate = lr;
      TrainResult res = train_toy(tc, data, [&](const TrainLogEntry &e) {
        if (e.step % 100 == 0 || e.step + 1 == steps) {
          err << "step " << e.step << " loss " << fmt(e.loss, 6) << " bpp " << fmt(e.bpp, 4) << " mse "
              << fmt(e.mse, 4) << "\n";
        }
      });
      json meta;
      meta["run"] = provenance(app, active);
      if (!res.log.empty()) {
        meta["smoothed_loss_first"] = smoothed_loss(res.log, false);
        meta["smoothed_loss_last"] = smoothed_loss(res.log, true);
      }
      res.model.save(output, meta);
      if (!log_path.empty()) {
        std::ostringstream csv;
        csv << provenance_line(app, active) << "step,loss,bpp,mse\n" << std::setprecision(17);
        for (const TrainLogEntry &e : res.log) csv << e.step << ',' << e.loss << ',' << e.bpp << ',' << e.mse << '\n';
        emit(log_path, csv.str(), out);
      }
      err << "wrote " << output << "\n";
    } else if (gs->parsed()) {
      if (count == 1) {
        write_sequence(output, generate_sequence(sc, rc.seed));
      } else {
        auto all = generate_dataset(sc, count, rc.seed);
        for (int i = 0; i < count; ++i) {
          char name[32];
          std::snprintf(name, sizeof name, "seq_%03d", i);
          write_sequence((std::filesystem::path(output) / name).string(), all[i]);
        }
      }
      err << "wrote " << count << " sequence(s) of " << sc.frames << " frames\n";
    } else if (lm->parsed()) {
      if (grid > 0) {
        std::vector<double> axis;
        for (int i = 1; i <= grid; ++i) axis.push_back(static_cast<double>(i) / (grid + 1));
        std::vector<PolicyCell> cells = policy_compare_grid(axis, axis);
        std::ostringstream csv;
        csv << provenance_line(app, active);
        write_policy_csv(csv, cells);
        emit(output, csv.str(), out);
        std::size_t near_ok = 0;
        for (const PolicyCell &c : cells) near_ok += c.total_near <= c.total_further;
        err << "near <= further in " << near_ok << " of " << cells.size() << " cells; threshold agreement "
            << fmt(agreement_fraction(cells), 6) << "\n";
      } else {
        LossModelParams p;
        p.alpha = alpha;
        p.beta = beta;
        p.n_ref = rc.n_ref;
        p.frames = lm_frames;
        p.policy = DuplicationPolicy::kNear;
        const double tn = total_loss(p).total;
        p.policy = DuplicationPolicy::kFurther;
        const double tf = total_loss(p).total;
        std::ostringstream o;
        o << "near_total " << fmt(tn) << "\nfurther_total " << fmt(tf) << "\ngap " << fmt(tf - tn) << "\n";
        if (rc.n_ref == 4 && lm_frames == 4) {
          o << "threshold " << fmt(threshold_alpha(beta)) << "\n";
          std::optional<double> crit = critical_alpha_numeric(beta);
          o << "critical_alpha " << (crit ? fmt(*crit) : std::string("none")) << "\n";
        }
        emit(output, o.str(), out);
      }
    } else if (bd->parsed()) {
      std::ifstream a(anchor), t(test);
      if (!a) throw CorruptionError("cannot open " + anchor);
      if (!t) throw CorruptionError("cannot open " + test);
      const double v = bd_rate(read_rd_csv(a), read_rd_csv(t));
      out << std::fixed << std::setprecision(6) << v + 0.0 << "\n";
    } else if (rp->parsed()) {
      std::vector<Model> models;
      if (weight_list.empty()) {
        ModelConfig cfg = seeded_config(rc, rc.n_ref, parse_fusion_mode(rc.fusion));
        for (int li = 0; li < 4; ++li) models.push_back(Model::seeded(cfg, rc.seed + li, li));
      } else {
        for (const std::string &w : weight_list) models.push_back(Model::load(w));
      }
      std::vector<std::vector<Image>> seqs;
      for (const std::string &in : inputs) seqs.push_back(read_sequence(in));
      auto run_all = [&](DuplicationPolicy policy) {
        std::vector<LambdaRun> runs;
        CodingSettings cs = settings_of(rc);
        cs.policy = policy;
        for (const Model &m : models) {
          LambdaRun run{m.lambda_index, lambda_for_index(m.lambda_index), {}};
          for (std::size_t i = 0; i < seqs.size(); ++i) {
            EncodeResult r = encode_sequence(seqs[i], m, cs);
            SequenceRun q{inputs[i], r.bytes.size(), seqs[i].size(), seqs[i][0].width, seqs[i][0].height, {}};
            for (std::size_t t = 0; t < seqs[i].size(); ++t) q.frame_psnr.push_back(psnr(seqs[i][t], r.recon[t].pixels));
            run.sequences.push_back(std::move(q));
          }
          runs.push_back(std::move(run));
        }
        return runs;
      };
      std::vector<LambdaRun> runs = run_all(parse_policy(rc.policy));
      std::vector<LambdaRun> base;
      if (!baseline_policy.empty()) base = run_all(parse_policy(baseline_policy));
      RdReport rep = rd_report(runs, baseline_policy.empty() ? nullptr : &base);
      std::ostringstream csv, table;
      csv << provenance_line(app, active);
      write_rd_csv(csv, rep);
      write_rd_table(table, rep, rc.policy + " / " + rc.fusion);
      emit(output, csv.str(), out);
      (output.empty() || output == "-" ? err : out) << table.str();
    } else if (gc->parsed()) {
      GradSuiteOptions o;
      o.seeds = gc_seeds;
      o.pipeline = !gc_ops_only;
      o.seed = rc.seed;
      bool all = true;
      for (const GradSuiteEntry &e : run_grad_suite(o)) {
        out << std::left << std::setw(28) << e.name << " max_rel_err " << std::setw(12) << fmt(e.report.max_rel_err, 4)
            << " coords " << std::setw(6) << e.report.coords_checked << (e.report.pass ? " PASS" : " FAIL") << "\n";
        if (!e.report.pass) {
          all = false;
          if (!e.report.failure.empty()) err << e.name << ": " << e.report.failure << "\n";
        }
      }
      if (!all) return 2;
    }
  } catch (const UsageError &e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace bnvc
