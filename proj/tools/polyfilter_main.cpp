// polyfilter command-line entry point.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "polyfilter/errors.hpp"
#include "polyfilter/experiments.hpp"
#include "polyfilter/selftest.hpp"

namespace {

using namespace polyfilter;

enum ExitCode { kOk = 0, kDataError = 1, kNumericalError = 2, kSelftestFailure = 3 };

struct CommonArgs {
  std::string family = "laguerre";
  std::vector<std::string> families{"laguerre"};
  TrainConfig cfg = [] {
    TrainConfig c;
    c.epochs = kAutoEpochs;
    return c;
  }();
  std::string out = "out";
};

void add_training_flags(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--epochs", a.cfg.epochs, "Training epochs (default: 400 with folds, else 200)")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", a.cfg.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  cmd->add_option("--wd", a.cfg.weight_decay, "L2 weight decay")->check(CLI::NonNegativeNumber);
  cmd->add_option("--dropout", a.cfg.dropout, "Dropout probability")->check(CLI::Range(0.0, 0.999999));
  cmd->add_option("--seed", a.cfg.seed, "Random seed");
  cmd->add_option("--krawtchouk-n", a.cfg.krawtchouk_n, "Krawtchouk support size N")->check(CLI::PositiveNumber);
  cmd->add_option("--out", a.out, "Output directory");
}

const auto kFamilyCheck = CLI::IsMember({"chebyshev", "laguerre", "meixner", "krawtchouk"});

std::vector<FamilyKind> parse_families(const std::vector<std::string>& names) {
  std::vector<FamilyKind> out;
  for (const std::string& n : names) out.push_back(parse_family(n));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Training reallocates the same large matrices every epoch. Keeping them on
  // the heap instead of mmap/munmap round trips removes most system time.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  CLI::App app{"Spectral graph neural networks with adaptive orthogonal-polynomial filters"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");  // frees -h for --h

  CommonArgs train_args;
  std::string train_dataset;
  auto* train = app.add_subcommand("train", "Train one configuration and write summary.csv plus per-run logs");
  train->add_option("--dataset", train_dataset, "Dataset directory or name")->required();
  train->add_option("--family", train_args.family, "Polynomial family")->check(kFamilyCheck);
  train->add_option("--k", train_args.cfg.num_bases, "Number of polynomial bases K")->check(CLI::PositiveNumber);
  train->add_option("--h", train_args.cfg.hidden, "Hidden width H")->check(CLI::PositiveNumber);
  add_training_flags(train, train_args);

  CommonArgs ak_args;
  std::string ak_dataset;
  std::vector<int> ks{2, 3, 5, 7, 10};
  auto* ablate_k = app.add_subcommand("ablate-k", "Accuracy as a function of K; writes ablate_k.csv");
  ablate_k->add_option("--dataset", ak_dataset, "Dataset directory or name")->required();
  ablate_k->add_option("--family", ak_args.families, "Families (comma separated)")
      ->delimiter(',')
      ->check(kFamilyCheck);
  ablate_k->add_option("--ks", ks, "K values (comma separated)")->delimiter(',')->check(CLI::PositiveNumber);
  ablate_k->add_option("--h", ak_args.cfg.hidden, "Hidden width H")->check(CLI::PositiveNumber);
  add_training_flags(ablate_k, ak_args);

  CommonArgs ah_args;
  std::string ah_dataset;
  std::vector<int> hs{16, 32, 64};
  auto* ablate_h = app.add_subcommand("ablate-h", "Accuracy as a function of H; writes ablate_h.csv");
  ablate_h->add_option("--dataset", ah_dataset, "Dataset directory or name")->required();
  ablate_h->add_option("--family", ah_args.families, "Families (comma separated)")
      ->delimiter(',')
      ->check(kFamilyCheck);
  ablate_h->add_option("--hs", hs, "H values (comma separated)")->delimiter(',')->check(CLI::PositiveNumber);
  ablate_h->add_option("--k", ah_args.cfg.num_bases, "Number of polynomial bases K")->check(CLI::PositiveNumber);
  add_training_flags(ablate_h, ah_args);

  CommonArgs ra_args;
  std::vector<std::string> ra_datasets{"cora", "citeseer", "pubmed", "texas", "cornell"};
  auto* report_alpha = app.add_subcommand("report-alpha", "Learned Laguerre alpha per dataset; writes alpha.csv");
  report_alpha->add_option("--datasets", ra_datasets, "Datasets (comma separated)")->delimiter(',');
  report_alpha->add_option("--k", ra_args.cfg.num_bases, "Number of polynomial bases K")->check(CLI::PositiveNumber);
  report_alpha->add_option("--h", ra_args.cfg.hidden, "Hidden width H")->check(CLI::PositiveNumber);
  add_training_flags(report_alpha, ra_args);

  bool inject_fault = false;
  auto* selftest = app.add_subcommand("selftest", "Run the oracle suites");
  selftest->add_flag("--inject-fault", inject_fault, "Perturb a recurrence coefficient (mutation check)")
      ->group("");

  CLI11_PARSE(app, argc, argv);

  const unsigned threads = thread_cap();
  try {
    if (*train) {
      train_args.cfg.family = parse_family(train_args.family);
      const Outcome o = cmd_train(train_dataset, train_args.cfg, train_args.out, threads);
      std::cout << kSummaryHeader << '\n' << summary_row(o) << '\n';
    } else if (*ablate_k || *ablate_h) {
      const bool by_k = ablate_k->parsed();
      CommonArgs& a = by_k ? ak_args : ah_args;
      const auto rows = by_k ? cmd_ablate_k(ak_dataset, parse_families(a.families), ks, a.cfg, a.out, threads)
                             : cmd_ablate_h(ah_dataset, parse_families(a.families), hs, a.cfg, a.out, threads);
      std::cout << (by_k ? kAblateKHeader : kAblateHHeader) << '\n';
      for (const AblationRow& r : rows) std::cout << r.value << ',' << to_string(r.family) << ',' << r.acc << '\n';
    } else if (*report_alpha) {
      std::cout << kAlphaHeader << '\n';
      for (const AlphaRow& r : cmd_report_alpha(ra_datasets, ra_args.cfg, ra_args.out, threads))
        std::cout << r.dataset << ',' << r.alpha_layer1 << ',' << r.alpha_layer2 << '\n';
    } else if (*selftest) {
      testing::set_coefficient_fault(inject_fault);
      const SelftestReport report = run_selftest();
      print_report(report, std::cout);
      return report.ok() ? kOk : kSelftestFailure;
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}
