#include "rptrees/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace rpt {

double friedman1_f(const double* x, double x5_coeff) {
    return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) +
           20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] + x5_coeff * x[4];
}

Dataset gen_friedman1(index_t n, double noise_sd, std::uint64_t seed, Friedman1Options opts) {
    if (n < 1) throw EmptyDataset("gen_friedman1 requires n >= 1");
    Rng rng(seed);
    const index_t p = 10;
    DenseMatrix X(n, p);
    DenseMatrix Y(n, 1);
    for (index_t i = 0; i < n; ++i) {
        for (index_t j = 0; j < p; ++j)
            X(i, j) = opts.input_law == InputLaw::Uniform01 ? rng.uniform01() : rng.normal();
        double row[5] = {X(i, 0), X(i, 1), X(i, 2), X(i, 3), X(i, 4)};
        Y(i, 0) = friedman1_f(row, opts.x5_coeff) + (noise_sd > 0.0 ? noise_sd * rng.normal() : 0.0);
    }
    return Dataset{std::move(X), std::move(Y), Task::Regression};
}

Dataset gen_friedman1_chain(index_t n, index_t d, std::uint64_t seed) {
    if (n < 1) throw EmptyDataset("gen_friedman1_chain requires n >= 1");
    Rng rng(seed);
    DenseMatrix X(n, 5);
    DenseMatrix Y(n, d);
    for (index_t i = 0; i < n; ++i) {
        double row[5];
        for (index_t j = 0; j < 5; ++j) row[j] = X(i, j) = rng.normal();
        double prev = friedman1_f(row) + rng.normal();
        Y(i, 0) = prev;
        for (index_t j = 1; j < d; ++j) {
            prev += rng.normal();
            Y(i, j) = prev;
        }
    }
    return Dataset{std::move(X), std::move(Y), Task::Regression};
}

Dataset gen_friedman1_group(index_t n, index_t d, std::uint64_t seed) {
    if (n < 1) throw EmptyDataset("gen_friedman1_group requires n >= 1");
    Rng rng(seed);
    DenseMatrix X(n, 5);
    DenseMatrix Y(n, d);
    for (index_t i = 0; i < n; ++i) {
        double row[5];
        for (index_t j = 0; j < 5; ++j) row[j] = X(i, j) = rng.normal();
        const double f = friedman1_f(row);
        for (index_t j = 0; j < d; ++j) Y(i, j) = f + rng.normal();
    }
    return Dataset{std::move(X), std::move(Y), Task::Regression};
}

Dataset gen_friedman1_ind(index_t n, index_t d, std::uint64_t seed) {
    if (n < 1) throw EmptyDataset("gen_friedman1_ind requires n >= 1");
    Rng rng(seed);
    DenseMatrix X(n, 5 * d);
    DenseMatrix Y(n, d);
    for (index_t i = 0; i < n; ++i) {
        for (index_t j = 0; j < 5 * d; ++j) X(i, j) = rng.normal();
        for (index_t j = 0; j < d; ++j) {
            double row[5];
            for (index_t k = 0; k < 5; ++k) row[k] = X(i, 5 * j + k);
            Y(i, j) = friedman1_f(row) + rng.normal();
        }
    }
    return Dataset{std::move(X), std::move(Y), Task::Regression};
}

Dataset gen_twonorm(index_t n, std::uint64_t seed) {
    if (n < 1) throw EmptyDataset("gen_twonorm requires n >= 1");
    Rng rng(seed);
    const index_t p = 20;
    const double a = 2.0 / std::sqrt(20.0);
    DenseMatrix X(n, p);
    DenseMatrix Y(n, 1);
    // Exactly balanced labels, shuffled.
    std::vector<double> labels(n);
    for (index_t i = 0; i < n; ++i) labels[i] = (i < n / 2) ? -1.0 : 1.0;
    for (index_t i = n - 1; i > 0; --i)
        std::swap(labels[i], labels[rng.uniform_int(i + 1)]);
    for (index_t i = 0; i < n; ++i) {
        const double mu = labels[i] > 0 ? a : -a;
        for (index_t j = 0; j < p; ++j) X(i, j) = mu + rng.normal();
        Y(i, 0) = labels[i];
    }
    return Dataset{std::move(X), std::move(Y), Task::BinaryClassification};
}

Dataset gen_random_sparse_regression(index_t n, index_t p, double target_density,
                                     std::uint64_t seed) {
    if (n < 1) throw EmptyDataset("gen_random_sparse_regression requires n >= 1");
    Rng rng(seed);
    CscMatrix X;
    X.n_rows = n;
    X.n_cols = p;
    X.indptr.assign(static_cast<std::size_t>(p) + 1, 0);
    if (target_density >= 1.0) {
        for (index_t j = 0; j < p; ++j) {
            for (index_t i = 0; i < n; ++i) {
                double v;
                do { v = rng.normal(); } while (v == 0.0);
                X.indices.push_back(i);
                X.data.push_back(v);
            }
            X.indptr[j + 1] = X.nnz();
        }
    } else {
        // Geometric gap sampling: per column, each row is present independently
        // with probability `target_density`, visited in O(nnz).
        const double log1mp = std::log1p(-target_density);
        for (index_t j = 0; j < p; ++j) {
            double i = -1.0;
            for (;;) {
                const double u = rng.uniform01();
                i += 1.0 + std::floor(std::log1p(-u) / log1mp);
                if (i >= static_cast<double>(n)) break;
                double v;
                do { v = rng.normal(); } while (v == 0.0);
                X.indices.push_back(static_cast<index_t>(i));
                X.data.push_back(v);
            }
            X.indptr[j + 1] = X.nnz();
        }
    }
    DenseMatrix Y(n, 1);
    for (index_t i = 0; i < n; ++i) Y(i, 0) = rng.uniform01();
    return Dataset{std::move(X), std::move(Y), Task::Regression};
}

Dataset take_samples(const Dataset& ds, const std::vector<index_t>& rows) {
    Dataset out;
    out.task = ds.task;
    out.Y = take_rows(ds.Y, rows);
    if (ds.sparse())
        out.X = take_rows(ds.csc_x(), rows);
    else
        out.X = take_rows(ds.dense_x(), rows);
    return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw Error("train_fraction must lie in (0, 1)");
    const index_t n = ds.n();
    Rng rng(spec.seed);
    std::vector<index_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (index_t i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_int(i + 1)]);

    std::vector<index_t> train, test;
    if (spec.stratified && ds.task != Task::Regression) {
        // Proportional per-class counts keep class ratios within one sample.
        std::vector<index_t> pos, neg;
        for (index_t i : order) (ds.Y(i, 0) > 0 ? pos : neg).push_back(i);
        auto take = [&](const std::vector<index_t>& grp) {
            const auto k = static_cast<index_t>(
                std::llround(spec.train_fraction * static_cast<double>(grp.size())));
            for (index_t i = 0; i < static_cast<index_t>(grp.size()); ++i)
                (i < k ? train : test).push_back(grp[i]);
        };
        take(pos);
        take(neg);
    } else {
        const auto k = static_cast<index_t>(
            std::llround(spec.train_fraction * static_cast<double>(n)));
        for (index_t i = 0; i < n; ++i) (i < k ? train : test).push_back(order[i]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {take_samples(ds, train), take_samples(ds, test)};
}

namespace {
void column_stats(const DenseMatrix& m, std::vector<double>& mean, std::vector<double>& scale) {
    const index_t n = m.n_rows(), d = m.n_cols();
    mean.assign(d, 0.0);
    scale.assign(d, 1.0);
    for (index_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (index_t i = 0; i < n; ++i) s += m(i, j);
        mean[j] = s / static_cast<double>(n);
        double ss = 0.0;
        for (index_t i = 0; i < n; ++i) {
            const double c = m(i, j) - mean[j];
            ss += c * c;
        }
        const double var = ss / static_cast<double>(n);
        scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
}

DenseMatrix transform(const DenseMatrix& m, const std::vector<double>& mean,
                      const std::vector<double>& scale) {
    DenseMatrix out(m.n_rows(), m.n_cols(), m.layout());
    for (index_t j = 0; j < m.n_cols(); ++j)
        for (index_t i = 0; i < m.n_rows(); ++i)
            out(i, j) = (m(i, j) - mean[j]) / scale[j];
    return out;
}
}  // namespace

std::pair<Dataset, StandardizeRecord> standardize(const Dataset& ds) {
    if (ds.sparse()) throw Unsupported("standardize expects a dense input matrix");
    StandardizeRecord rec;
    column_stats(ds.dense_x(), rec.x_mean, rec.x_scale);
    column_stats(ds.Y, rec.y_mean, rec.y_scale);
    return {apply_standardize(ds, rec), rec};
}

Dataset apply_standardize(const Dataset& ds, const StandardizeRecord& rec) {
    Dataset out;
    out.task = ds.task;
    out.X = transform(ds.dense_x(), rec.x_mean, rec.x_scale);
    out.Y = transform(ds.Y, rec.y_mean, rec.y_scale);
    return out;
}

namespace {

bool blank_or_comment(const std::string& line) {
    for (char c : line) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

}  // namespace

Dataset load_svmlight(const std::string& path, Task task) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<Triplet> trips;
    std::vector<std::vector<double>> targets;
    index_t max_col = -1, max_label = -1;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank_or_comment(line)) continue;
        std::istringstream ls(line);
        std::string target_tok;
        if (!(ls >> target_tok)) throw ParseError("missing target", line_no);

        std::vector<double> target;
        if (task == Task::Multilabel) {
            if (target_tok != "-") {  // "-" marks an empty label set
                std::istringstream ts(target_tok);
                std::string part;
                while (std::getline(ts, part, ',')) {
                    try {
                        const long lab = std::stol(part);
                        if (lab < 0) throw ParseError("negative label id", line_no);
                        target.push_back(static_cast<double>(lab));
                        max_label = std::max<index_t>(max_label, lab);
                    } catch (const std::invalid_argument&) {
                        throw ParseError("bad label id '" + part + "'", line_no);
                    }
                }
            }
        } else {
            try {
                target.push_back(std::stod(target_tok));
            } catch (const std::invalid_argument&) {
                throw ParseError("bad target '" + target_tok + "'", line_no);
            }
        }
        targets.push_back(std::move(target));

        const index_t row = static_cast<index_t>(targets.size()) - 1;
        std::string tok;
        index_t prev_col = -1;
        while (ls >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos) throw ParseError("expected idx:value", line_no);
            index_t col;
            double value;
            try {
                col = std::stoll(tok.substr(0, colon)) - 1;  // 1-based on disk
                value = std::stod(tok.substr(colon + 1));
            } catch (const std::invalid_argument&) {
                throw ParseError("bad feature token '" + tok + "'", line_no);
            }
            if (col < 0) throw ParseError("feature index must be >= 1", line_no);
            if (col <= prev_col) throw ParseError("feature indices must increase", line_no);
            prev_col = col;
            max_col = std::max(max_col, col);
            if (value != 0.0) trips.emplace_back(row, col, value);
        }
    }
    const index_t n = static_cast<index_t>(targets.size());
    if (n == 0) throw EmptyDataset("no samples in " + path);

    Dataset out;
    out.task = task;
    out.X = csc_from_triplets(std::move(trips), n, max_col + 1);
    if (task == Task::Multilabel) {
        DenseMatrix Y(n, max_label + 1);
        for (index_t i = 0; i < n; ++i)
            for (double lab : targets[i]) Y(i, static_cast<index_t>(lab)) = 1.0;
        out.Y = std::move(Y);
    } else {
        DenseMatrix Y(n, 1);
        for (index_t i = 0; i < n; ++i) Y(i, 0) = targets[i][0];
        out.Y = std::move(Y);
    }
    return out;
}

void save_svmlight(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    const CscMatrix csc = ds.sparse() ? ds.csc_x() : sparsify(ds.dense_x());
    const CsrMatrix csr = csc_to_csr(csc);
    char buf[64];
    for (index_t i = 0; i < ds.n(); ++i) {
        if (ds.task == Task::Multilabel) {
            bool first = true;
            for (index_t j = 0; j < ds.d(); ++j) {
                if (ds.Y(i, j) != 0.0) {
                    if (!first) out << ',';
                    out << j;
                    first = false;
                }
            }
            if (first) out << '-';
        } else {
            std::snprintf(buf, sizeof buf, "%.17g", ds.Y(i, 0));
            out << buf;
        }
        for (index_t k = csr.indptr[i]; k < csr.indptr[i + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", csr.data[k]);
            out << ' ' << (csr.indices[k] + 1) << ':' << buf;
        }
        out << '\n';
    }
}

namespace {
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}
}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    long line_no = 0;
    if (!std::getline(in, line)) throw EmptyDataset("no header in " + path);
    ++line_no;
    const std::vector<std::string> header = split_csv_line(line);

    std::vector<bool> is_target(header.size(), false);
    std::vector<index_t> target_cols;
    for (const auto& name : schema.target_columns) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ParseError("target column '" + name + "' not found", 1);
        is_target[static_cast<std::size_t>(it - header.begin())] = true;
    }
    for (std::size_t j = 0; j < header.size(); ++j)
        if (is_target[j]) target_cols.push_back(static_cast<index_t>(j));

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank_or_comment(line)) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " cells", line_no);
        std::vector<double> row(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j) {
            try {
                row[j] = std::stod(cells[j]);
            } catch (const std::invalid_argument&) {
                throw ParseError("bad numeric cell '" + cells[j] + "'", line_no);
            }
        }
        rows.push_back(std::move(row));
    }
    const index_t n = static_cast<index_t>(rows.size());
    if (n == 0) throw EmptyDataset("no samples in " + path);
    const index_t d = static_cast<index_t>(target_cols.size());
    const index_t p = static_cast<index_t>(header.size()) - d;

    DenseMatrix X(n, p), Y(n, d);
    for (index_t i = 0; i < n; ++i) {
        index_t xi = 0, yi = 0;
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (is_target[j])
                Y(i, yi++) = rows[i][j];
            else
                X(i, xi++) = rows[i][j];
        }
    }
    return Dataset{std::move(X), std::move(Y), schema.task};
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    const DenseMatrix X = ds.sparse() ? densify(ds.csc_x()) : ds.dense_x();
    for (index_t j = 0; j < X.n_cols(); ++j) out << "x" << j << ',';
    for (index_t j = 0; j < ds.d(); ++j) out << "y" << j << (j + 1 < ds.d() ? "," : "");
    out << '\n';
    char buf[64];
    for (index_t i = 0; i < ds.n(); ++i) {
        for (index_t j = 0; j < X.n_cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", X(i, j));
            out << buf << ',';
        }
        for (index_t j = 0; j < ds.d(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", ds.Y(i, j));
            out << buf << (j + 1 < ds.d() ? "," : "");
        }
        out << '\n';
    }
}

}  // namespace rpt
