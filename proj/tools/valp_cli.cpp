#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "valp/dataset.hpp"
#include "valp/dot.hpp"
#include "valp/eval.hpp"
#include "valp/graph_io.hpp"
#include "valp/models.hpp"
#include "valp/runtime.hpp"
#include "valp/search.hpp"
#include "valp/synthesis.hpp"
#include "valp/validator.hpp"
#include "valp/weights_io.hpp"

using namespace valp;

namespace {

struct Common {
    std::uint64_t seed = 0;
    int max_n = 11;
    double alpha = 0.5;
    double phi = 0.3;
    std::string beta = "1,1,1,1e-4";
    int bins = 32;
    int train_size = 5000;
    int test_size = 1000;
    int steps = 2000;
    int batch = 50;
    double lr = 1e-3;
    int workers = 1;
    std::string out;
};

/// Order: mse, cross entropy, sample nll, kl.
LossBetas parse_betas(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    for (std::string tok; std::getline(ss, tok, ',');) v.push_back(std::stod(tok));
    if (v.size() != 4) throw Error(ErrorKind::InvalidSpec, "--beta takes four comma-separated values");
    return {v[0], v[1], v[2], v[3]};
}

SynthesisConfig synthesis_config(const Common& c) {
    SynthesisConfig cfg;
    cfg.seed = c.seed;
    cfg.max_n = c.max_n;
    cfg.alpha = c.alpha;
    cfg.phi = c.phi;
    cfg.betas = parse_betas(c.beta);
    cfg.learning_rate = c.lr;
    cfg.batch_size = c.batch;
    cfg.steps = c.steps;
    return cfg;
}

MultitaskDataset fashion(const Common& c) {
    const auto dir = data_dir_from_env();
    if (!dir) throw Error(ErrorKind::Io, "VALP_DATA_DIR is not set");
    return load_fashion(*dir, c.train_size, c.test_size, c.bins);
}

std::string with_suffix(const std::string& base, const std::string& suffix) {
    const auto dot = base.rfind(".json");
    return (dot != std::string::npos && dot + 5 == base.size() ? base.substr(0, dot) : base) + suffix;
}

void write_matrix_csv(std::ostream& os, const Matrix& m) {
    char buf[32];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.6g", m(r, c));
            os << (c ? "," : "") << buf;
        }
        os << '\n';
    }
}

void add_common(CLI::App* app, Common& c, bool synth, bool training) {
    app->add_option("--seed", c.seed, "random seed");
    if (synth) {
        app->add_option("--max-n", c.max_n, "network budget")->capture_default_str();
        app->add_option("--alpha", c.alpha, "probability of creating a network")->capture_default_str();
        app->add_option("--phi", c.phi, "probability a decoder input survives inference")->capture_default_str();
        app->add_option("--beta", c.beta, "loss weights: mse,xent,nll,kl")->capture_default_str();
    }
    app->add_option("--bins", c.bins, "histogram bins")->capture_default_str();
    if (training) {
        app->add_option("--train-size", c.train_size, "training images")->capture_default_str();
        app->add_option("--test-size", c.test_size, "test images")->capture_default_str();
        app->add_option("--steps", c.steps, "training steps")->capture_default_str();
        app->add_option("--batch", c.batch, "minibatch size")->capture_default_str();
        app->add_option("--lr", c.lr, "learning rate")->capture_default_str();
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthesize, validate, train and sample VALP models"};
    app.require_subcommand(1);
    Common c;
    std::string graph_path, weights_path, task = "classification";
    int count = 10, condition = 0, n_configs = 20;

    auto* synth = app.add_subcommand("synth", "emit a random graph JSON and its DOT rendering");
    add_common(synth, c, true, false);
    synth->add_option("--steps", c.steps, "training steps stored in the graph")->capture_default_str();
    synth->add_option("--batch", c.batch, "minibatch size stored in the graph")->capture_default_str();
    synth->add_option("--out", c.out, "output graph JSON path")->required();

    auto* validate_cmd = app.add_subcommand("validate", "check a graph and print violations as JSON lines");
    validate_cmd->add_option("graph", graph_path)->required();

    auto* train_cmd = app.add_subcommand("train", "train a graph on fashion-MNIST");
    train_cmd->add_option("graph", graph_path)->required();
    add_common(train_cmd, c, false, true);
    train_cmd->add_option("--out", c.out, "output prefix for weights and trace")->required();

    auto* sample_cmd = app.add_subcommand("sample", "draw samples from a trained model as CSV");
    sample_cmd->add_option("graph", graph_path)->required();
    sample_cmd->add_option("--weights", weights_path)->required();
    sample_cmd->add_option("--n", count, "samples (per conditioning row with --condition)")->capture_default_str();
    sample_cmd->add_option("--condition", condition, "condition on this many test images");
    add_common(sample_cmd, c, false, false);
    sample_cmd->add_option("--out", c.out, "CSV path (stdout when omitted)");

    auto* search_cmd = app.add_subcommand("search", "random search sweep to a records CSV");
    add_common(search_cmd, c, true, true);
    search_cmd->add_option("--configs", n_configs, "configurations")->capture_default_str();
    search_cmd->add_option("--workers", c.workers, "concurrent configurations")->capture_default_str();
    search_cmd->add_option("--out", c.out, "records CSV path")->required();

    auto* baseline_cmd = app.add_subcommand("baseline", "single-task 100-unit MLP baseline");
    baseline_cmd->add_option("--task", task)->check(CLI::IsMember({"classification", "regression"}));
    add_common(baseline_cmd, c, false, true);

    auto* dot_cmd = app.add_subcommand("export-dot", "render a graph as Graphviz DOT");
    dot_cmd->add_option("graph", graph_path)->required();
    dot_cmd->add_option("--out", c.out, "DOT path (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            const ModelGraph g = initialize(fashion_inputs(), fashion_outputs(c.bins), synthesis_config(c));
            save_graph(g, c.out);
            write_text_file(with_suffix(c.out, ".dot"), export_dot(g));
            std::cout << "wrote " << c.out << " (" << g.networks.size() << " networks, " << g.connections.size()
                      << " connections)\n";
        } else if (*validate_cmd) {
            const ValidationReport r = validate(load_graph(graph_path));
            std::cout << (r.ok ? "ok\n" : report_to_json_lines(r));
            return r.ok ? 0 : 1;
        } else if (*train_cmd) {
            const ModelGraph g = load_graph(graph_path);
            const MultitaskDataset data = fashion(c);
            Rng rng(c.seed);
            ExecutableModel m = compile(g, rng);
            Hyperparams h = g.hyper;
            h.epochs = c.steps;
            h.batch_size = c.batch;
            h.learning_rate = c.lr;
            TrainOptions opt;
            opt.on_step = [](long step, double loss) {
                if (step % 100 == 0) std::cerr << "step " << step << " loss " << loss << "\n";
            };
            const LossTrace trace = train(m, data.train, h, rng, opt);
            save_weights(m.weights, c.out + ".weights.json");
            write_text_file(c.out + ".trace.csv", trace.to_csv());
            m.mode = Mode::Infer;
            const BatchMap out = infer(m, input_batches(g, data.test), rng);
            for (const auto& o : g.outputs) {
                if (o.spec.dtype() == DataType::Discrete) {
                    std::cout << o.id << " accuracy " << accuracy(out.at(o.id), data.test.labels) << "\n";
                } else if (o.spec.dtype() == DataType::Numeric) {
                    std::cout << o.id << " mse " << mse_metric(out.at(o.id), {data.test.group("R"), DataType::Numeric})
                              << "\n";
                }
            }
        } else if (*sample_cmd) {
            const ModelGraph g = load_graph(graph_path);
            ExecutableModel m;
            m.graph = g;
            m.order = topological_order(g);
            m.weights = load_weights(weights_path);
            m.mode = Mode::Infer;
            Rng rng(c.seed);
            DataBatch samples;
            if (condition > 0) {
                Common dc = c;
                dc.train_size = 0;
                dc.test_size = condition;
                const MultitaskDataset data = fashion(dc);
                samples = conditioned_sample(m, input_batches(g, data.test), count, rng);
            } else {
                BatchMap in;
                for (const auto& i : g.inputs) in[i.id] = {Matrix::Zero(count, i.spec.width()), i.spec.dtype()};
                const BatchMap out = infer(m, in, rng);
                for (const auto& o : g.outputs) {
                    if (o.spec.dtype() == DataType::Samples) samples = out.at(o.id);
                }
            }
            if (c.out.empty()) {
                write_matrix_csv(std::cout, samples.values);
            } else {
                std::ofstream f(c.out);
                write_matrix_csv(f, samples.values);
            }
        } else if (*search_cmd) {
            const MultitaskDataset data = fashion(c);
            OracleConfig oc;
            oc.seed = c.seed;
            oc.floor = 0.0;
            const OracleClassifier oracle = train_oracle(data.train, oc);
            std::cerr << "oracle holdout accuracy " << oracle.holdout_accuracy << "\n";
            SearchConfig sc;
            sc.synth = synthesis_config(c);
            sc.bins = c.bins;
            sc.eval_rows = c.test_size;
            sc.workers = c.workers;
            const auto records = random_search(n_configs, c.seed, data, sc, oracle);
            write_text_file(c.out, records_to_csv(records));
        } else if (*baseline_cmd) {
            const MultitaskDataset data = fashion(c);
            BaselineConfig bc;
            bc.steps = c.steps;
            bc.batch_size = c.batch;
            bc.learning_rate = c.lr;
            bc.seed = c.seed;
            const bool cls = task == "classification";
            const double v = baseline_mlp(cls ? BaselineTask::Classification : BaselineTask::Regression, data, bc);
            std::cout << (cls ? "accuracy " : "mse ") << v << "\n";
            if (!cls) std::cout << "predict-mean mse " << predict_mean_mse(data) << "\n";
        } else if (*dot_cmd) {
            const std::string dot = export_dot(load_graph(graph_path));
            if (c.out.empty()) {
                std::cout << dot;
            } else {
                write_text_file(c.out, dot);
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
