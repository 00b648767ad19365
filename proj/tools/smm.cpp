#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "smm/algebra.hpp"
#include "smm/csv.hpp"
#include "smm/errors.hpp"
#include "smm/exact_em.hpp"
#include "smm/image.hpp"
#include "smm/init.hpp"
#include "smm/mcem.hpp"
#include "smm/model_file.hpp"
#include "smm/plot.hpp"
#include "smm/protocol.hpp"
#include "smm/rate.hpp"
#include "smm/regime.hpp"
#include "smm/sampling.hpp"

namespace {

using namespace smm;

constexpr const char* kDefaultUnmixRegime = "(CUQM)^2000((CUQ)^5M)^1000";

// Substream ids for the CLI's own random draws.
enum Stream : std::uint64_t { kMcemInit = 2, kImageSampling = 3, kSampleCommand = 4, kPixelSubset = 5 };

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

std::vector<double> parse_doubles(const std::string& text, const char* what) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError(std::string("invalid number in ") + what + ": '" + item + "'");
    }
  }
  return out;
}

std::vector<int> parse_ints(const std::string& text, const char* what) {
  std::vector<int> out;
  for (double v : parse_doubles(text, what)) {
    if (v != std::floor(v) || std::fabs(v) > 1e9) throw InputError(std::string(what) + " must be integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

FamilyPtr parse_family(const std::string& text) {
  const auto parts = parse_ints(text, "--family");
  if (parts.size() != 2) throw InputError("--family expects k,m");
  if (parts[0] < 0 || parts[1] < 1) throw InputError("--family needs k >= 0 and m >= 1");
  return enumerate_simplices(parts[0], parts[1]);
}

InitMethod parse_init(const std::string& text) {
  if (text == "random") return InitMethod::Random;
  if (text == "farthest") return InitMethod::FarthestPoint;
  throw InputError("--init must be random or farthest");
}

Eigen::MatrixXd initial_vertices(const DataSet& data, int m, InitMethod method, Rng& rng) {
  return method == InitMethod::FarthestPoint ? init_farthest_point(data, m, rng) : init_random(data, m, rng);
}

void print_rate(const RateBreakdown& rate, bool bits) {
  const double unit = bits ? std::numbers::ln2 : 1.0;
  std::cout << "term," << (bits ? "bits" : "nats") << "\n"
            << "entropy," << format_double(rate.entropy_term / unit) << "\n"
            << "expected_rate," << format_double(rate.expected_rate_term / unit) << "\n"
            << "noise_entropy," << format_double(rate.noise_entropy_term / unit) << "\n"
            << "total," << format_double(rate.total / unit) << "\n";
}

struct FitOptions {
  std::string data_path;
  std::string image_path;
  std::size_t samples = 500;
  std::string family = "1,4";
  std::string mode = "exact";
  std::string regime = "(CUQM)^500";
  int restarts = 10;
  int pilot_iters = 40;
  int final_iters = 500;
  std::string sigma = "isotropic";
  std::uint64_t seed = 0;
  std::string init = "random";
  double proposal_scale = 0.3;
  bool local_c_step = false;
  std::string out;
  std::string trace;
};

void run_fit(const FitOptions& opt) {
  if (opt.data_path.empty() == opt.image_path.empty()) throw InputError("give exactly one of --data and --image");
  DataSet data = [&] {
    if (!opt.data_path.empty()) return load_points_csv(opt.data_path);
    Rng rng(mix_seed(opt.seed, 0, kImageSampling));
    return sample_image_intensity(read_image(opt.image_path), opt.samples, rng);
  }();
  const FamilyPtr family = parse_family(opt.family);
  const SigmaMode sigma_mode = parse_sigma_mode(opt.sigma);
  const InitMethod init = parse_init(opt.init);

  ModelMetadata meta;
  meta.seed = opt.seed;
  meta.fit_mode = opt.mode;
  std::string trace_text;
  ModelParams result = [&] {
    if (opt.mode == "exact") {
      ProtocolConfig config;
      config.restarts = opt.restarts;
      config.pilot_iters = opt.pilot_iters;
      config.final_iters = opt.final_iters;
      config.sigma_mode = sigma_mode;
      config.init = init;
      config.seed = opt.seed;
      ProtocolReport report = restart_protocol(data, family, config);
      const FitReport& fit = report.fit;
      Eigen::MatrixXd trace(static_cast<Eigen::Index>(fit.log_likelihood.size()), 3);
      for (std::size_t t = 0; t < fit.log_likelihood.size(); ++t) {
        trace(static_cast<Eigen::Index>(t), 0) = static_cast<double>(t);
        trace(static_cast<Eigen::Index>(t), 1) = fit.log_likelihood[t];
        trace(static_cast<Eigen::Index>(t), 2) = fit.encoding_rate[t];
      }
      trace_text = csv_text({"iteration", "log_likelihood", "encoding_rate"}, trace);
      meta.iterations = fit.iterations;
      meta.log_likelihood = fit.log_likelihood.back();
      meta.encoding_rate = fit.encoding_rate.back();
      std::cout << "restarts: " << report.pilot_rates.size() << ", winner " << report.winner + 1
                << ", pilot rate " << format_double(report.pilot_rates[report.winner]) << "\n";
      std::cout << "termination: " << to_string(fit.termination) << " after " << fit.iterations << " iterations\n";
      for (const auto& note : fit.notes) std::cerr << "warning: " << note << "\n";
      if (fit.underflow_fallbacks > 0)
        std::cerr << "warning: " << fit.underflow_fallbacks << " points fell back to uniform responsibilities\n";
      return fit.params;
    }
    if (opt.mode != "mcem") throw InputError("--mode must be exact or mcem");
    const Regime regime = parse_regime(opt.regime);
    Rng rng(mix_seed(opt.seed, 0, kMcemInit));
    const ModelParams start =
        initial_params(data, family, initial_vertices(data, family->vertex_count(), init, rng), sigma_mode);
    McemConfig config;
    config.seed = opt.seed;
    config.proposal_scale = opt.proposal_scale;
    config.local_c_step = opt.local_c_step;
    config.sigma_mode = sigma_mode;
    config.record_log_likelihood = family->dimension() <= 1;
    McemReport report = run_mcem(data, start, regime, config);
    const bool with_ll = !report.log_likelihood.empty();
    Eigen::MatrixXd trace(static_cast<Eigen::Index>(report.m_steps), with_ll ? 5 : 4);
    for (std::size_t t = 0; t < report.m_steps; ++t) {
      const auto r = static_cast<Eigen::Index>(t);
      trace(r, 0) = static_cast<double>(t + 1);
      trace(r, 1) = report.encoding_rate[t];
      trace(r, 2) = report.c_acceptance[t];
      trace(r, 3) = report.u_acceptance[t];
      if (with_ll) trace(r, 4) = report.log_likelihood[t];
    }
    std::vector<std::string> header{"m_step", "encoding_rate", "c_acceptance", "u_acceptance"};
    if (with_ll) header.emplace_back("log_likelihood");
    trace_text = csv_text(header, trace);
    meta.regime = opt.regime;
    meta.iterations = static_cast<int>(report.m_steps);
    if (!report.encoding_rate.empty()) meta.encoding_rate = report.encoding_rate.back();
    if (with_ll) meta.log_likelihood = report.log_likelihood.back();
    std::cout << "M steps: " << report.m_steps << "\n";
    return report.params;
  }();

  save_model(opt.out, result, meta);
  if (!opt.trace.empty()) write_file(opt.trace, trace_text);
  std::cout << "encoding rate (nats): " << format_double(intrinsic_encoding_rate(result).total) << "\n";
  std::cout << "wrote " << opt.out << "\n";
}

struct UnmixOptions {
  std::string image_path;
  std::string family = "3,7";
  std::string regime = kDefaultUnmixRegime;
  std::string sigma = "isotropic";
  std::uint64_t seed = 0;
  int burn_in = 100;
  int samples = 200;
  std::size_t max_pixels = 20000;
  int candidates = 100;
  int rounds = 100;
  double proposal_scale = 0.3;
  std::string out_dir = "unmix";
};

void run_unmix(const UnmixOptions& opt) {
  const DataSet pixels = pixels_to_dataset(read_image(opt.image_path));
  const FamilyPtr family = parse_family(opt.family);
  const SigmaMode sigma_mode = parse_sigma_mode(opt.sigma);
  const Regime regime = parse_regime(opt.regime);

  DataSet training = pixels;
  if (opt.max_pixels > 0 && pixels.size() > opt.max_pixels) {
    Rng rng(mix_seed(opt.seed, 0, kPixelSubset));
    std::vector<std::size_t> pool(pixels.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    Eigen::MatrixXd subset(pixels.dim(), static_cast<Eigen::Index>(opt.max_pixels));
    for (std::size_t j = 0; j < opt.max_pixels; ++j) {
      std::swap(pool[j], pool[j + rng.below(pool.size() - j)]);
      subset.col(static_cast<Eigen::Index>(j)) = pixels.point(pool[j]);
    }
    training = DataSet(std::move(subset));
  }

  Rng rng(mix_seed(opt.seed, 0, kMcemInit));
  const Eigen::MatrixXd vertices =
      init_farthest_point(training, family->vertex_count(), rng, opt.candidates, opt.rounds);
  McemConfig config;
  config.seed = opt.seed;
  config.proposal_scale = opt.proposal_scale;
  config.sigma_mode = sigma_mode;
  const McemReport report = run_mcem(training, initial_params(training, family, vertices, sigma_mode), regime, config);
  const Eigen::MatrixXd z = estimate_posterior_z(pixels, report.params, opt.burn_in, opt.samples, config);

  const std::filesystem::path dir(opt.out_dir);
  std::filesystem::create_directories(dir);
  ModelMetadata meta;
  meta.seed = opt.seed;
  meta.fit_mode = "mcem";
  meta.regime = opt.regime;
  meta.iterations = static_cast<int>(report.m_steps);
  if (!report.encoding_rate.empty()) meta.encoding_rate = report.encoding_rate.back();
  save_model(dir / "model.json", report.params, meta);
  const auto written = emit_channel_maps(z, pixels, report.params.vertices(), dir);
  std::cout << "M steps: " << report.m_steps << "\n";
  std::cout << "wrote " << (dir / "model.json").string() << " and " << written.size() << " images\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simplicial mixture models: fitting, sampling, unmixing and encoding rates"};
  app.require_subcommand(1);

  FitOptions fit_opt;
  auto* fit = app.add_subcommand("fit", "Fit a model to points (CSV) or to an intensity-sampled image");
  fit->add_option("--data", fit_opt.data_path, "CSV file, one point per row");
  fit->add_option("--image", fit_opt.image_path, "Grayscale PGM/PNG sampled by intensity");
  fit->add_option("--samples", fit_opt.samples, "Points drawn from --image")->capture_default_str();
  fit->add_option("--family", fit_opt.family, "Simplex dimension and vertex count, k,m")->capture_default_str();
  fit->add_option("--mode", fit_opt.mode, "exact (k <= 1) or mcem")->capture_default_str();
  fit->add_option("--regime", fit_opt.regime, "Action program for mcem")->capture_default_str();
  fit->add_option("--restarts", fit_opt.restarts, "Pilot initializations (exact)")->capture_default_str();
  fit->add_option("--pilot-iters", fit_opt.pilot_iters, "EM steps per pilot")->capture_default_str();
  fit->add_option("--final-iters", fit_opt.final_iters, "EM steps for the winner")->capture_default_str();
  fit->add_option("--sigma", fit_opt.sigma, "isotropic, diagonal or full")->capture_default_str();
  fit->add_option("--seed", fit_opt.seed, "Master seed")->capture_default_str();
  fit->add_option("--init", fit_opt.init, "random or farthest")->capture_default_str();
  fit->add_option("--proposal-scale", fit_opt.proposal_scale, "U-step mixing weight (mcem)")->capture_default_str();
  fit->add_flag("--local-c-step", fit_opt.local_c_step, "Use the vertex-replacement C-step (mcem)");
  fit->add_option("--out", fit_opt.out, "Model file to write")->required();
  fit->add_option("--trace", fit_opt.trace, "CSV of per-iteration traces");

  std::string sample_model_path, sample_out, sample_latent;
  std::size_t sample_count = 1000;
  std::uint64_t sample_seed = 0;
  bool sample_no_noise = false;
  auto* sample = app.add_subcommand("sample", "Draw points from a model file");
  sample->add_option("--model", sample_model_path, "Model file")->required();
  sample->add_option("--count", sample_count, "Number of points")->capture_default_str();
  sample->add_option("--seed", sample_seed, "Master seed")->capture_default_str();
  sample->add_flag("--no-noise", sample_no_noise, "Omit the Gaussian noise");
  sample->add_option("--out", sample_out, "CSV of points")->required();
  sample->add_option("--latent", sample_latent, "CSV of latent barycentric points z");

  UnmixOptions unmix_opt;
  auto* unmix = app.add_subcommand("unmix", "Fit an RGB image and write per-vertex channel maps");
  unmix->add_option("--image", unmix_opt.image_path, "RGB PPM/PNG")->required();
  unmix->add_option("--family", unmix_opt.family, "k,m")->capture_default_str();
  unmix->add_option("--regime", unmix_opt.regime, "Action program")->capture_default_str();
  unmix->add_option("--sigma", unmix_opt.sigma, "isotropic, diagonal or full")->capture_default_str();
  unmix->add_option("--seed", unmix_opt.seed, "Master seed")->capture_default_str();
  unmix->add_option("--burn-in", unmix_opt.burn_in, "Sweeps before averaging z")->capture_default_str();
  unmix->add_option("--samples", unmix_opt.samples, "Sweeps averaged for z")->capture_default_str();
  unmix->add_option("--max-pixels", unmix_opt.max_pixels, "Random pixel subset used for fitting (0 = all)")
      ->capture_default_str();
  unmix->add_option("--candidates", unmix_opt.candidates, "Farthest-point candidates per round")->capture_default_str();
  unmix->add_option("--rounds", unmix_opt.rounds, "Farthest-point rounds")->capture_default_str();
  unmix->add_option("--proposal-scale", unmix_opt.proposal_scale, "U-step mixing weight")->capture_default_str();
  unmix->add_option("--out-dir", unmix_opt.out_dir, "Output directory")->capture_default_str();

  std::string rate_model;
  bool rate_bits = false;
  auto* rate = app.add_subcommand("rate", "Print the intrinsic encoding rate of a model file");
  rate->add_option("--model", rate_model, "Model file")->required();
  rate->add_flag("--bits", rate_bits, "Report bits instead of nats");

  std::string kde_y = "0.6,0.3,0.1", kde_l = "1,2,4,8,16,32", kde_out;
  auto* kde = app.add_subcommand("kde-demo", "Convergence table of the smoothed point mixture");
  kde->add_option("--y", kde_y, "Point on the simplex")->capture_default_str();
  kde->add_option("--l", kde_l, "Smoothing levels")->capture_default_str();
  kde->add_option("--out", kde_out, "CSV file (stdout when omitted)");

  std::string plot_model, plot_data, plot_out;
  double plot_threshold = 0.05;
  auto* plot = app.add_subcommand("plot", "SVG of data and the heavier edges of a model");
  plot->add_option("--model", plot_model, "Model file")->required();
  plot->add_option("--data", plot_data, "CSV of points")->required();
  plot->add_option("--threshold", plot_threshold, "Minimum edge weight")->capture_default_str();
  plot->add_option("--out", plot_out, "SVG file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*fit) {
      run_fit(fit_opt);
    } else if (*sample) {
      const ModelFile model = load_model(sample_model_path);
      Rng rng(mix_seed(sample_seed, 0, kSampleCommand));
      const SampleOutput drawn = sample_model(model.params, sample_count, !sample_no_noise, rng);
      std::vector<std::string> header;
      for (int j = 0; j < drawn.data.dim(); ++j) header.push_back("x" + std::to_string(j + 1));
      write_csv(sample_out, header, drawn.data.points().transpose());
      if (!sample_latent.empty()) {
        std::vector<std::string> zh;
        for (int j = 0; j < model.params.vertex_count(); ++j) zh.push_back("z" + std::to_string(j + 1));
        write_csv(sample_latent, zh, drawn.latent.transpose());
      }
    } else if (*unmix) {
      run_unmix(unmix_opt);
    } else if (*rate) {
      print_rate(intrinsic_encoding_rate(load_model(rate_model).params), rate_bits);
    } else if (*kde) {
      const auto y = parse_doubles(kde_y, "--y");
      const auto ls = parse_ints(kde_l, "--l");
      const auto rows = convergence_diagnostic(y, ls);
      Eigen::MatrixXd table(static_cast<Eigen::Index>(rows.size()), 3);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        table(static_cast<Eigen::Index>(r), 0) = rows[r].l;
        table(static_cast<Eigen::Index>(r), 1) = rows[r].mean_error;
        table(static_cast<Eigen::Index>(r), 2) = rows[r].max_covariance;
      }
      const std::string text = csv_text({"l", "mean_error", "max_covariance"}, table);
      if (kde_out.empty()) {
        std::cout << text;
      } else {
        write_file(kde_out, text);
      }
    } else if (*plot) {
      const ModelFile model = load_model(plot_model);
      emit_edge_plot(model.params, load_points_csv(plot_data), plot_threshold, plot_out);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
