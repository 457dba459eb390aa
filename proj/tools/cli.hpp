#pragma once

// Command-line front end. Kept in a header so the test suite can drive
// run_cli() in-process as well as through the built executable.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lann/lann.hpp"

namespace lann::cli {

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kUsageError = 2 };

struct HyperFlags {
    std::size_t k = Hyperparams{}.k;
    double beta = Hyperparams{}.beta;
    double lr = Hyperparams{}.learning_rate;
    std::size_t epochs = Hyperparams{}.epochs;
    double epsilon = Hyperparams{}.epsilon;
    std::uint64_t seed = 42;

    void add_to(CLI::App& app, bool training = true) {
        app.add_option("--k", k, "Number of neighbors")->capture_default_str()->check(CLI::PositiveNumber);
        app.add_option("--beta", beta, "Softmax temperature")->capture_default_str()->check(CLI::PositiveNumber);
        if (training) {
            app.add_option("--lr", lr, "SGD learning rate")->capture_default_str()->check(CLI::PositiveNumber);
            app.add_option("--epochs", epochs, "Training epochs")->capture_default_str()->check(CLI::NonNegativeNumber);
        }
        app.add_option("--epsilon", epsilon, "Distance floor")->capture_default_str()->check(CLI::PositiveNumber);
        app.add_option("--seed", seed, "Random seed")->capture_default_str();
    }

    Hyperparams params() const {
        Hyperparams h;
        h.k = k;
        h.beta = beta;
        h.learning_rate = lr;
        h.epochs = epochs;
        h.epsilon = epsilon;
        h.seed = seed;
        return h;
    }
};

inline LabelColumn parse_label_flag(const std::string& flag) {
    if (flag.empty()) return {};
    if (auto idx = text::parse_index(flag)) return *idx;
    return flag;
}

inline std::vector<double> parse_query(const std::string& q) {
    std::vector<double> out;
    for (auto cell : text::split(q)) {
        auto v = text::parse_double(cell);
        if (!v) throw Error(ErrorKind::Parse, "query value '" + std::string(text::trim(cell)) + "' is not a number");
        out.push_back(*v);
    }
    return out;
}

template <class Writer>
void write_file(const std::string& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
    writer(out);
    if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

inline std::string class_text(const LabeledDataset& d, Label y) {
    return d.class_names().empty() ? std::to_string(y) : d.class_names()[y];
}

inline std::string feature_text(const LabeledDataset& d, std::size_t l) {
    return d.feature_names().empty() ? "f" + std::to_string(l) : d.feature_names()[l];
}

/// Parses argv and runs one subcommand. Normal output goes to `out`,
/// diagnostics to `err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Locally adaptive nearest neighbors: per-point metric learning for kNN", "lann"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    std::function<void()> action;
    int action_code = kOk;

    // crossval ---------------------------------------------------------------
    auto* crossval = app.add_subcommand("crossval", "Stratified k-fold cross validation of lann or plain kNN");
    std::string cv_data, cv_label, cv_algo = "lann", cv_out, cv_name;
    std::size_t cv_folds = 10;
    HyperFlags cv_hyper;
    crossval->add_option("--data", cv_data, "Input CSV (header row, label column)")->required();
    crossval->add_option("--label", cv_label, "Label column name or zero-based index (default: last)");
    crossval->add_option("--algo", cv_algo, "Algorithm")->check(CLI::IsMember({"lann", "knn"}))->capture_default_str();
    crossval->add_option("--folds", cv_folds, "Number of folds")->capture_default_str()->check(CLI::Range(2, 1000));
    crossval->add_option("--out", cv_out, "Write the result row to this CSV file");
    crossval->add_option("--name", cv_name, "Dataset tag in the result (default: file stem)");
    cv_hyper.add_to(*crossval);
    crossval->callback([&] {
        action = [&] {
            const auto data = load_csv(cv_data, parse_label_flag(cv_label));
            const auto algo = cv_algo == "knn" ? Algorithm::Knn : Algorithm::Lann;
            const std::string tag = cv_name.empty() ? std::filesystem::path(cv_data).stem().string() : cv_name;
            const auto res = cross_validate(data, algo, cv_hyper.params(), cv_hyper.seed, cv_folds, tag);
            if (!cv_out.empty()) write_file(cv_out, [&](std::ostream& os) { write_cv_result(os, res); });
            out << tag << ' ' << to_string(algo) << ": " << text::format_double(res.mean) << " ± "
                << text::format_double(res.stddev) << '\n';
        };
    });

    // train ------------------------------------------------------------------
    auto* train = app.add_subcommand("train", "Fit a model on a CSV dataset and save it");
    std::string tr_data, tr_label, tr_out, tr_losses;
    HyperFlags tr_hyper;
    train->add_option("--data", tr_data, "Input CSV")->required();
    train->add_option("--label", tr_label, "Label column name or zero-based index (default: last)");
    train->add_option("--out", tr_out, "Model file to write")->required();
    train->add_option("--losses", tr_losses, "Write per-epoch mean loss to this CSV file");
    tr_hyper.add_to(*train);
    train->callback([&] {
        action = [&] {
            const auto data = load_csv(tr_data, parse_label_flag(tr_label));
            const auto [model, report] = fit(data, tr_hyper.params());
            save_model(tr_out, model);
            if (!tr_losses.empty()) {
                write_file(tr_losses, [&](std::ostream& os) {
                    os << "epoch,mean_loss\n";
                    for (std::size_t e = 0; e < report.epoch_losses.size(); ++e) {
                        os << e << ',' << text::format_double(report.epoch_losses[e]) << '\n';
                    }
                });
            }
            out << "trained on " << data.size() << " points, " << report.epochs << " epochs";
            if (!report.epoch_losses.empty()) {
                out << ", mean loss " << text::format_double(report.epoch_losses.front()) << " -> "
                    << text::format_double(report.final_loss);
            }
            if (report.metric_resets > 0) out << ", " << report.metric_resets << " metric resets";
            out << '\n';
        };
    });

    // predict ----------------------------------------------------------------
    auto* predict_cmd = app.add_subcommand("predict", "Predict labels with a saved model");
    std::string pr_model, pr_data, pr_label, pr_out;
    std::vector<std::string> pr_queries;
    predict_cmd->add_option("--model", pr_model, "Model file")->required();
    auto* pr_query_opt = predict_cmd->add_option("--query", pr_queries, "Comma-separated raw feature values");
    auto* pr_data_opt = predict_cmd->add_option("--data", pr_data, "Labeled CSV to predict (reports accuracy)");
    pr_query_opt->excludes(pr_data_opt);
    predict_cmd->add_option("--label", pr_label, "Label column of --data (default: last)");
    predict_cmd->add_option("--out", pr_out, "Write predictions CSV here");
    predict_cmd->callback([&] {
        action = [&] {
            if (pr_queries.empty() && pr_data.empty()) throw CLI::RequiredError("--query or --data");
            const auto model = load_model(pr_model);
            const auto& train_set = model.dataset;
            std::ostringstream table;
            table << "index,predicted";
            for (Label c = 0; c < train_set.num_classes(); ++c) table << ",p_" << class_text(train_set, c);
            table << '\n';
            auto emit = [&](std::size_t idx, std::span<const double> x) {
                const auto p = predict(model, x);
                table << idx << ',' << class_text(train_set, p.label);
                for (double v : p.probabilities.values) table << ',' << text::format_double(v);
                table << '\n';
                return p.label;
            };
            if (!pr_data.empty()) {
                const auto data = load_csv(pr_data, parse_label_flag(pr_label));
                std::size_t correct = 0;
                for (std::size_t i = 0; i < data.size(); ++i) {
                    const Label y = emit(i, data.point(i));
                    correct += class_text(train_set, y) == class_text(data, data.label(i));
                }
                out << "accuracy " << text::format_double(static_cast<double>(correct) / data.size()) << '\n';
            } else {
                for (std::size_t q = 0; q < pr_queries.size(); ++q) emit(q, parse_query(pr_queries[q]));
            }
            if (pr_out.empty()) {
                out << table.str();
            } else {
                write_file(pr_out, [&](std::ostream& os) { os << table.str(); });
            }
        };
    });

    // explain ----------------------------------------------------------------
    auto* explain_cmd = app.add_subcommand("explain", "Feature relevance profile behind one prediction");
    std::string ex_model, ex_query, ex_out;
    explain_cmd->add_option("--model", ex_model, "Model file")->required();
    explain_cmd->add_option("--query", ex_query, "Comma-separated raw feature values")->required();
    explain_cmd->add_option("--out", ex_out, "Write the profile CSV here");
    explain_cmd->callback([&] {
        action = [&] {
            const auto model = load_model(ex_model);
            const auto x = parse_query(ex_query);
            const auto profile = explain(model, x);
            const auto p = predict(model, x);
            std::ostringstream table;
            table << "feature,relevance\n";
            for (std::size_t l = 0; l < profile.relevances.size(); ++l) {
                table << feature_text(model.dataset, l) << ',' << text::format_double(profile.relevances[l]) << '\n';
            }
            if (ex_out.empty()) {
                out << "predicted " << class_text(model.dataset, p.label) << '\n' << table.str();
            } else {
                write_file(ex_out, [&](std::ostream& os) { os << table.str(); });
                out << "predicted " << class_text(model.dataset, p.label) << '\n';
            }
        };
    });

    // fingerprints -----------------------------------------------------------
    auto* fp_cmd = app.add_subcommand("fingerprints", "Class-wise mean relevance profiles of a saved model");
    std::string fp_model, fp_out;
    fp_cmd->add_option("--model", fp_model, "Model file")->required();
    fp_cmd->add_option("--out", fp_out, "Output CSV (class,feature,relevance)")->required();
    fp_cmd->callback([&] {
        action = [&] {
            const auto model = load_model(fp_model);
            const auto fp = fingerprints(model);
            write_file(fp_out, [&](std::ostream& os) { write_fingerprints(os, fp, model.dataset); });
            out << "wrote fingerprints for " << fp.classes.size() << " classes\n";
        };
    });

    // export-dist ------------------------------------------------------------
    auto* ed_cmd = app.add_subcommand("export-dist", "Pairwise local-metric distance matrix of the training set");
    std::string ed_model, ed_out, ed_labels, ed_sym = "mean";
    ed_cmd->add_option("--model", ed_model, "Model file")->required();
    ed_cmd->add_option("--out", ed_out, "Matrix CSV (no header)")->required();
    ed_cmd->add_option("--labels-out", ed_labels, "Labels file, one id per line (default: <out>.labels)");
    ed_cmd->add_option("--symmetrize", ed_sym, "Symmetrization")
        ->check(CLI::IsMember({"mean", "min", "none"}))
        ->capture_default_str();
    ed_cmd->callback([&] {
        action = [&] {
            const auto model = load_model(ed_model);
            const auto mode = ed_sym == "min" ? Symmetrize::Min : ed_sym == "none" ? Symmetrize::None : Symmetrize::Mean;
            const auto d = export_distance_matrix(model, mode);
            write_file(ed_out, [&](std::ostream& os) { write_matrix(os, d); });
            const std::string labels_path = ed_labels.empty() ? ed_out + ".labels" : ed_labels;
            write_file(labels_path, [&](std::ostream& os) { write_labels(os, model.dataset.labels()); });
            out << "wrote " << d.rows() << "x" << d.cols() << " matrix\n";
        };
    });

    // generate ---------------------------------------------------------------
    auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
    std::string gen_kind, gen_out;
    std::uint64_t gen_seed = 42;
    ClassificationParams cp;
    LicoriceParams lp;
    gen_cmd->add_option("kind", gen_kind, "classification | licorice")
        ->required()
        ->check(CLI::IsMember({"classification", "licorice"}));
    gen_cmd->add_option("-o,--out", gen_out, "Output CSV")->required();
    gen_cmd->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
    gen_cmd->add_option("--samples", cp.samples, "classification: number of points")->capture_default_str();
    gen_cmd->add_option("--features", cp.features, "classification: total features")->capture_default_str();
    gen_cmd->add_option("--informative", cp.informative, "classification: strongly relevant features")
        ->capture_default_str();
    gen_cmd->add_option("--weak", cp.weak, "classification: weakly relevant features")->capture_default_str();
    gen_cmd->add_option("--redundant", cp.redundant, "classification: redundant features")->capture_default_str();
    gen_cmd->add_option("--classes", cp.classes, "classification: number of classes")->capture_default_str();
    gen_cmd->add_option("--cylinders", lp.cylinders, "licorice: number of cylinders")->capture_default_str();
    gen_cmd->add_option("--inside", lp.inside_per_cylinder, "licorice: inside points per cylinder")
        ->capture_default_str();
    gen_cmd->add_option("--outside", lp.outside_per_cylinder, "licorice: outside points per cylinder")
        ->capture_default_str();
    gen_cmd->add_option("--radius", lp.radius, "licorice: cylinder radius")->capture_default_str();
    gen_cmd->add_option("--length", lp.length, "licorice: cylinder length")->capture_default_str();
    gen_cmd->callback([&] {
        action = [&] {
            cp.seed = gen_seed;
            lp.seed = gen_seed;
            const auto data = gen_kind == "licorice" ? generate_licorice(lp) : generate_classification(cp);
            write_csv(gen_out, data);
            out << "wrote " << data.size() << " points with " << data.dim() << " features\n";
        };
    });

    // gradcheck --------------------------------------------------------------
    auto* gc_cmd = app.add_subcommand("gradcheck", "Compare analytic metric gradients with finite differences");
    GradientCheckOptions gc;
    std::string gc_data, gc_label;
    HyperFlags gc_hyper;
    gc_cmd->add_option("--trials", gc.trials, "Random instances")->capture_default_str()->check(CLI::PositiveNumber);
    gc_cmd->add_option("--tol", gc.tolerance, "Maximum relative error")->capture_default_str();
    gc_cmd->add_option("--step", gc.step, "Central difference step")->capture_default_str();
    gc_cmd->add_option("--data", gc_data, "Check on this dataset instead of random ones");
    gc_cmd->add_option("--label", gc_label, "Label column of --data (default: last)");
    gc_hyper.add_to(*gc_cmd, false);
    gc_cmd->callback([&] {
        action = [&] {
            gc.seed = gc_hyper.seed;
            const auto report = gc_data.empty()
                                    ? check_gradients(gc, gc_hyper.params())
                                    : check_gradients(load_csv(gc_data, parse_label_flag(gc_label)), gc_hyper.params(), gc);
            out << "trials " << report.trials << ", components " << report.components_compared << " (skipped "
                << report.components_skipped << "), max relative error "
                << text::format_double(report.max_relative_error) << ", tolerance "
                << text::format_double(report.tolerance) << ": " << (report.passed ? "PASS" : "FAIL") << '\n';
            if (!report.passed) action_code = kRuntimeError;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsageError;
    }

    try {
        action();
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::InvalidArgument ? kUsageError : kRuntimeError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return action_code;
}

}  // namespace lann::cli
