#include "valp/search.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <thread>

#include "valp/graph_io.hpp"
#include "valp/models.hpp"
#include "valp/runtime.hpp"

namespace valp {

namespace {

ModelGraph single_task_graph(BaselineTask task, int in_width, int out_width, int hidden) {
    const bool cls = task == BaselineTask::Classification;
    const NetworkType type = cls ? NetworkType::Discretizer : NetworkType::GenericMLP;
    const DataType dtype = cls ? DataType::Discrete : DataType::Numeric;
    std::vector<int> all(static_cast<std::size_t>(in_width));
    for (int i = 0; i < in_width; ++i) all[static_cast<std::size_t>(i)] = i;
    std::vector<int> out_all(static_cast<std::size_t>(out_width));
    for (int i = 0; i < out_width; ++i) out_all[static_cast<std::size_t>(i)] = i;

    ModelGraph g;
    g.inputs = {{"i0", DataUnitSpec(in_width, DataType::Numeric)}};
    g.networks.emplace_back("n0", type,
                            NetworkParams({"xavier_uniform", "xavier_uniform"},
                                          {"relu", std::string(final_activation(type))}, {hidden, out_width}),
                            CombinerKind::Concat, DataUnitSpec(out_width, dtype));
    g.outputs = {{"o0", DataUnitSpec(out_width, dtype), CombinerKind::Add}};
    g.connections = {Connection(0, "i0", "n0", all), Connection(1, "n0", "o0", out_all)};
    g.losses = {{"L0", cls ? LossKind::CrossEntropy : LossKind::Mse, "o0", cls ? "C" : "R", 1.0}};
    g.hyper.max_n = 1;
    return g;
}

const ModelOutputSpec* first_output(const ModelGraph& g, DataType t) {
    for (const auto& o : g.outputs) {
        if (o.spec.dtype() == t) return &o;
    }
    return nullptr;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

SearchRecord run_config(int index, std::uint64_t master_seed, const MultitaskDataset& data, const SearchConfig& cfg,
                        const OracleClassifier& oracle) {
    const auto start = std::chrono::steady_clock::now();
    SearchRecord rec;
    rec.config = index;
    rec.seed = config_seed(master_seed, index);
    try {
        SynthesisConfig sc = cfg.synth;
        sc.seed = rec.seed;
        const ModelGraph graph = initialize(fashion_inputs(), fashion_outputs(cfg.bins), sc);
        if (!cfg.graph_dir.empty()) {
            const auto path = cfg.graph_dir / ("config_" + std::to_string(index) + ".json");
            save_graph(graph, path);
            rec.graph_path = path.string();
        }
        Rng init_rng(Rng::derive(rec.seed, 1));
        ExecutableModel model = compile(graph, init_rng);
        Rng train_rng(Rng::derive(rec.seed, 2));
        const LossTrace trace = train(model, data.train, graph.hyper, train_rng);
        if (trace.size() > 0) {
            for (std::size_t b = 0; b < graph.losses.size(); ++b) {
                const double v = trace.values.back()[b];
                switch (graph.losses[b].kind) {
                    case LossKind::Mse: rec.loss_mse += v; break;
                    case LossKind::CrossEntropy: rec.loss_xent += v; break;
                    case LossKind::SampleNll: rec.loss_nll += v; break;
                    case LossKind::KlToStdNormal: rec.loss_kl += v; break;
                }
            }
        }

        model.mode = Mode::Infer;
        const DataSplit test = data.test.head(cfg.eval_rows);
        Rng infer_rng(Rng::derive(rec.seed, 3));
        const BatchMap out = infer(model, input_batches(graph, test), infer_rng);
        if (const auto* o = first_output(graph, DataType::Discrete)) rec.acc = accuracy(out.at(o->id), test.labels);
        if (const auto* o = first_output(graph, DataType::Numeric)) {
            rec.mse = mse_metric(out.at(o->id), DataBatch{test.group("R"), DataType::Numeric});
        }
        if (const auto* o = first_output(graph, DataType::Samples)) {
            const DataBatch& samples = out.at(o->id);
            rec.entropy = class_entropy(oracle.predict(samples.values), 10);
            if (has_conditioning_path(graph)) {
                rec.cond_acc = conditioning_accuracy(oracle, DataBatch{test.group("X"), DataType::Numeric}, samples);
            }
        }
    } catch (const Error& e) {
        rec.error = std::string(to_string(e.kind()));
    }
    rec.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

}  // namespace

double baseline_mlp(BaselineTask task, const MultitaskDataset& data, const BaselineConfig& cfg) {
    const bool cls = task == BaselineTask::Classification;
    const Matrix& target = data.train.group(cls ? "C" : "R");
    ModelGraph g = single_task_graph(task, static_cast<int>(data.train.group("X").cols()),
                                     static_cast<int>(target.cols()), cfg.hidden);
    g.hyper.learning_rate = cfg.learning_rate;
    g.hyper.batch_size = cfg.batch_size;
    g.hyper.epochs = cfg.steps;
    Rng rng(cfg.seed);
    ExecutableModel m = compile(g, rng);
    train(m, data.train, g.hyper, rng);
    const BatchMap out = infer(m, input_batches(g, data.test), rng);
    if (cls) return accuracy(out.at("o0"), data.test.labels);
    return mse_metric(out.at("o0"), DataBatch{data.test.group("R"), DataType::Numeric});
}

double predict_mean_mse(const MultitaskDataset& data) {
    const Matrix& r = data.train.group("R");
    const Eigen::RowVectorXd mean = r.colwise().mean();
    const Matrix& t = data.test.group("R");
    const Matrix pred = mean.replicate(t.rows(), 1);
    return loss_mse(pred, t).value;
}

std::uint64_t config_seed(std::uint64_t master_seed, int index) {
    return Rng::derive(master_seed, static_cast<std::uint64_t>(index));
}

std::vector<SearchRecord> random_search(int n_configs, std::uint64_t master_seed, const MultitaskDataset& data,
                                        const SearchConfig& cfg, const OracleClassifier& oracle) {
    std::vector<SearchRecord> records(static_cast<std::size_t>(std::max(0, n_configs)));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i = next++; i < n_configs; i = next++) {
            records[static_cast<std::size_t>(i)] = run_config(i, master_seed, data, cfg, oracle);
        }
    };
    const int workers = std::max(1, std::min(cfg.workers, n_configs));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return records;
}

std::string records_to_csv(const std::vector<SearchRecord>& records, bool with_wall) {
    std::string out = std::string(kSearchCsvHeader) + "\n";
    for (const auto& r : records) {
        out += std::to_string(r.config) + "," + std::to_string(r.seed) + ",";
        if (!r.error.empty()) {
            out += "error:" + r.error + ",,,,,,,,";
        } else {
            out += fmt(r.acc) + "," + fmt(r.mse) + "," + fmt(r.entropy) + "," + fmt(r.cond_acc) + "," +
                   fmt(r.loss_mse) + "," + fmt(r.loss_xent) + "," + fmt(r.loss_nll) + "," + fmt(r.loss_kl) + ",";
        }
        if (with_wall) out += fmt(r.wall_s);
        out += "\n";
    }
    return out;
}

}  // namespace valp
