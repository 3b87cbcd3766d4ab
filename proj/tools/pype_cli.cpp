#include "pype_cli.hpp"

#include "pype/analysis.hpp"
#include "pype/csv.hpp"
#include "pype/decoder.hpp"
#include "pype/oracle.hpp"
#include "pype/pe_grid.hpp"
#include "pype/seq_layout.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace pype::cli {

namespace fs = std::filesystem;

namespace {

/// Thrown for flag combinations CLI11 cannot reject on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridFlags {
  std::string scheme = "raster";
  int height = 0;
  int width = 0;
  int layers = 1;
  int interval = 1;
  int layer = 1;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--scheme", scheme, "raster | concentric | allone | pyramid")
        ->check(CLI::IsMember({"raster", "concentric", "allone", "pyramid"}));
    cmd.add_option("--height", height, "Patch rows")->required()->check(CLI::PositiveNumber);
    cmd.add_option("--width", width, "Patch columns (defaults to --height)")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--layers", layers, "Decoder depth for the descent schedule")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--interval", interval, "Descent interval t")->check(CLI::PositiveNumber);
    cmd.add_option("--layer", layer, "1-indexed layer to emit")->check(CLI::PositiveNumber);
  }

  int resolved_width() const { return width > 0 ? width : height; }
  EncodingScheme encoding() const { return EncodingScheme::parse(scheme, interval); }
  DescentSchedule schedule() const {
    return build_schedule(layers, interval, height, resolved_width());
  }
  PositionGrid grid() const {
    if (layer > layers) throw UsageError("--layer exceeds --layers");
    return grid_for_layer(encoding(), height, resolved_width(), schedule(), layer);
  }
};

void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty()) {
    out << text;
  } else {
    write_file(path, text);
  }
}

std::string matrix_to_csv(const Matrix& m) {
  std::string s;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) s += ',';
      s += format_real(m(i, j));
    }
    s += '\n';
  }
  return s;
}

Matrix matrix_from_csv(const std::string& text, const std::string& source) {
  const auto rows = parse_real_rows(text, source);
  if (rows.empty()) throw ParseError(source, 1, "empty matrix");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw ParseError(source, static_cast<int>(i + 1), "ragged row");
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::map<std::string, std::string> kv;
  std::istringstream in(read_file(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path, line_no, "expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

/// Splices `--key value` pairs from a --config file in front of the explicit flags, so
/// the explicit ones win under the take-last policy.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::optional<std::string> config;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!config || args.size() < 2) return args;

  std::vector<std::string> injected;
  for (const auto& [key, value] : read_key_values(*config)) {
    if (value == "true") {
      injected.push_back("--" + key);
    } else if (value != "false") {
      injected.push_back("--" + key);
      injected.push_back(value);
    }
  }
  args.insert(args.begin() + 2, injected.begin(), injected.end());
  return args;
}

int cmd_grid(const GridFlags& flags, const std::string& out_path, bool trace, std::ostream& out) {
  const auto grid = flags.grid();
  emit(out, out_path, grid_to_csv(grid));
  if (trace) out << "trace: " << schedule_trace(flags.schedule()) << '\n';
  return kExitOk;
}

int cmd_mask(const GridFlags& flags, int prefix_len, int instruction_len, bool fixed_instruction,
             bool validate, const std::string& out_path, std::ostream& out, std::ostream& err) {
  const auto layout = make_layout(prefix_len, flags.grid(), instruction_len);
  std::optional<int> anchor;
  if (fixed_instruction) {
    anchor = grid_for_layer(flags.encoding(), flags.height, flags.resolved_width(),
                            flags.schedule(), 1)
                 .max_index();
  }
  const auto positions = assign_positions(layout, anchor);
  const auto mask = build_mask(layout, positions);
  emit(out, out_path, positions_to_csv(positions) + mask_to_csv(mask));
  if (validate) {
    if (!validate_mask(mask, positions)) {
      err << "mask validation: FAIL\n";
      return kExitFailure;
    }
    err << "mask validation: PASS\n";
  }
  return kExitOk;
}

struct SimulateFlags {
  std::uint64_t seed = 0;
  int heads = 2;
  int dim = 16;
  int vocab = 32;
  double base = 10000.0;
  int prefix_len = 2;
  int instruction_len = 1;
  std::string tokens;
  int random_tokens = 0;
  std::string outdir;
  bool fixed_instruction = false;
  std::string save_weights;
  std::string load_weights;
};

std::vector<int> resolve_tokens(const SimulateFlags& sf, int total_len) {
  std::vector<int> ids;
  if (!sf.tokens.empty()) {
    const auto rows = parse_int_rows(sf.tokens, "--tokens");
    if (rows.size() != 1) throw UsageError("--tokens must be a single comma-separated list");
    for (const auto v : rows[0]) ids.push_back(static_cast<int>(v));
  } else {
    const int count = sf.random_tokens > 0 ? sf.random_tokens : total_len;
    SplitMix64 rng(sf.seed ^ 0x5EEDF00DULL);
    for (int t = 0; t < count; ++t) {
      ids.push_back(static_cast<int>(rng.next() % static_cast<std::uint64_t>(sf.vocab)));
    }
  }
  if (static_cast<int>(ids.size()) != total_len) {
    throw UsageError("token count " + std::to_string(ids.size()) + " does not match layout length " +
                     std::to_string(total_len));
  }
  return ids;
}

int cmd_simulate(const GridFlags& gf, const SimulateFlags& sf, std::ostream& out) {
  DecoderConfig cfg;
  cfg.num_layers = gf.layers;
  cfg.num_heads = sf.heads;
  cfg.model_dim = sf.dim;
  cfg.vocab_size = sf.vocab;
  cfg.seed = sf.seed;
  cfg.scheme = gf.encoding();
  cfg.rope_base = sf.base;
  cfg.instruction_positions =
      sf.fixed_instruction ? InstructionPositions::Fixed : InstructionPositions::FollowLayer;

  DecoderState state;
  if (!sf.load_weights.empty()) {
    std::ifstream in(sf.load_weights, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + sf.load_weights + "'");
    state = load_weights(in, cfg);
    cfg = state.config;
  } else {
    state = init_decoder(cfg);
  }
  if (!sf.save_weights.empty()) {
    std::ofstream o(sf.save_weights, std::ios::binary | std::ios::trunc);
    if (!o) throw std::runtime_error("cannot open '" + sf.save_weights + "' for writing");
    save_weights(state, o);
  }

  const int h = gf.height;
  const int w = gf.resolved_width();
  const auto schedule = build_schedule(cfg.num_layers, gf.interval, h, w);
  const auto layout = make_layout(sf.prefix_len, grid_for_layer(cfg.scheme, h, w, schedule, 1),
                                  sf.instruction_len);
  const auto tokens = resolve_tokens(sf, layout.total_len());
  const auto result = forward(state, tokens, layout, schedule);

  const fs::path dir(sf.outdir);
  fs::create_directories(dir);
  std::ostringstream meta;
  meta << "scheme=" << cfg.scheme.name() << "\nprefix_len=" << layout.prefix_len
       << "\nheight=" << h << "\nwidth=" << w << "\ninstruction_len=" << layout.instruction_len
       << "\nlayers=" << cfg.num_layers << "\nheads=" << cfg.num_heads
       << "\ninterval=" << gf.interval << "\nseed=" << cfg.seed << '\n';
  write_file((dir / "layout.txt").string(), meta.str());
  write_file((dir / "schedule.csv").string(), schedule_trace(schedule) + "\n");
  write_file((dir / "logits.csv").string(), matrix_to_csv(result.logits));
  for (const auto& rec : result.records) {
    const auto name = "attn_layer" + std::to_string(rec.layer) + "_head" + std::to_string(rec.head) + ".csv";
    write_file((dir / name).string(), matrix_to_csv(rec.probs));
  }
  if (layout.instruction_len > 0) {
    const auto maps = visual_to_instruction_attention(result.records, layout);
    for (std::size_t l = 0; l < maps.size(); ++l) {
      render_heatmap(maps[l], (dir / ("heatmap_layer" + std::to_string(l + 1) + ".pgm")).string());
    }
  }
  out << "wrote " << result.records.size() << " attention maps for " << layout.total_len()
      << " tokens to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_analyze(const std::string& attn_dir, int k, double threshold, const std::string& out_path,
                std::ostream& out) {
  const fs::path dir(attn_dir);
  const auto layout_path = (dir / "layout.txt").string();
  const auto kv = read_key_values(layout_path);
  auto get = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(layout_path, 0, "missing key '" + key + "'");
    try {
      return std::stoi(it->second);
    } catch (const std::exception&) {
      throw ParseError(layout_path, 0, "bad integer for '" + key + "'");
    }
  };
  const int h = get("height");
  const int w = get("width");
  const auto layout = make_layout(get("prefix_len"), build_grid(EncodingScheme::all_one(), h, w),
                                  get("instruction_len"));

  std::vector<AttentionRecord> records;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    int layer = 0, head = 0;
    char tail = 0;
    const auto name = path.filename().string();
    if (std::sscanf(name.c_str(), "attn_layer%d_head%d.cs%c", &layer, &head, &tail) != 3 || tail != 'v') {
      continue;
    }
    Matrix probs = matrix_from_csv(read_file(path.string()), path.string());
    if (probs.rows() != layout.total_len() || probs.cols() != layout.total_len()) {
      throw ParseError(path.string(), 1, "matrix shape does not match layout.txt");
    }
    records.push_back({layer, head, std::move(probs)});
  }
  if (records.empty()) throw std::runtime_error("no attn_layer*_head*.csv files in " + attn_dir);

  emit(out, out_path, metrics_to_csv(layer_report(records, layout, k, threshold)));
  return kExitOk;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Visual position-encoding laboratory", "pype"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  GridFlags gf;
  std::string out_path;
  bool trace = false;
  auto* grid_cmd = app.add_subcommand("grid", "Emit a layer's position grid as CSV");
  gf.add_to(*grid_cmd);
  grid_cmd->add_option("--out", out_path, "CSV output path (default stdout)");
  grid_cmd->add_flag("--trace", trace, "Also print the per-layer P_max trace");

  GridFlags mf;
  int prefix_len = 0, instruction_len = 0;
  bool fixed_instruction = false, validate = false;
  std::string mask_out;
  auto* mask_cmd = app.add_subcommand("mask", "Emit positions and the causal mask as CSV");
  mf.add_to(*mask_cmd);
  mask_cmd->add_option("--prefix-len", prefix_len)->check(CLI::NonNegativeNumber);
  mask_cmd->add_option("--instruction-len", instruction_len)->check(CLI::NonNegativeNumber);
  mask_cmd->add_flag("--fixed-instruction", fixed_instruction,
                     "Pin instruction positions to the first layer's max index");
  mask_cmd->add_flag("--validate", validate, "Check mask invariants; exit 1 on violation");
  mask_cmd->add_option("--out", mask_out);

  GridFlags sg;
  sg.layers = 2;
  sg.height = 3;
  SimulateFlags sf;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the toy decoder and dump attention");
  sg.add_to(*sim_cmd);
  sim_cmd->get_option("--height")->required(false);
  sim_cmd->add_option("--seed", sf.seed)->envname("PYPE_SEED");
  sim_cmd->add_option("--heads", sf.heads)->check(CLI::PositiveNumber);
  sim_cmd->add_option("--dim", sf.dim)->check(CLI::PositiveNumber);
  sim_cmd->add_option("--vocab", sf.vocab)->check(CLI::Range(2, 1 << 20));
  sim_cmd->add_option("--base", sf.base);
  sim_cmd->add_option("--prefix-len", sf.prefix_len)->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--instruction-len", sf.instruction_len)->check(CLI::NonNegativeNumber);
  auto* tokens_opt = sim_cmd->add_option("--tokens", sf.tokens, "Comma-separated token ids");
  sim_cmd->add_option("--random-tokens", sf.random_tokens, "Draw N seeded token ids")
      ->check(CLI::PositiveNumber)
      ->excludes(tokens_opt);
  sim_cmd->add_option("--outdir", sf.outdir)->required();
  sim_cmd->add_flag("--fixed-instruction", sf.fixed_instruction);
  sim_cmd->add_option("--save-weights", sf.save_weights);
  sim_cmd->add_option("--load-weights", sf.load_weights);

  std::string attn_dir, analyze_out;
  int k = kDefaultTopK;
  double threshold = kDefaultAnchorMultiple;
  auto* analyze_cmd = app.add_subcommand("analyze", "Anchor metrics per layer from simulate output");
  analyze_cmd->add_option("--attn-dir", attn_dir)->required();
  analyze_cmd->add_option("--k", k)->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--threshold", threshold)->check(CLI::Range(1.0, 1e12));
  analyze_cmd->add_option("--out", analyze_out);

  int check_cases = 1000;
  auto* check_cmd = app.add_subcommand("check", "Cross-check fast paths against oracles");
  check_cmd->add_option("--attention-cases", check_cases)->check(CLI::PositiveNumber);

  try {
    args = merge_config(std::move(args));
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (grid_cmd->parsed()) return cmd_grid(gf, out_path, trace, out);
    if (mask_cmd->parsed()) {
      return cmd_mask(mf, prefix_len, instruction_len, fixed_instruction, validate, mask_out, out, err);
    }
    if (sim_cmd->parsed()) return cmd_simulate(sg, sf, out);
    if (analyze_cmd->parsed()) return cmd_analyze(attn_dir, k, threshold, analyze_out, out);
    if (check_cmd->parsed()) return oracle::run_self_check(out, check_cases) ? kExitOk : kExitFailure;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace pype::cli
