#include <hierfcst/dataset.hpp>

#include <hierfcst/binary_io.hpp>
#include <hierfcst/error.hpp>
#include <hierfcst/rng.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace hierfcst::dataset {

PreorderTensor::PreorderTensor(std::vector<std::string> items, int periods, int max_lead)
    : items_(std::move(items)), periods_(periods), max_lead_(max_lead) {
    if (periods < 0 || max_lead < 0) {
        throw RangeError("tensor extents must be non-negative");
    }
    const auto cells = items_.size() * static_cast<std::size_t>(periods) *
                       static_cast<std::size_t>(max_lead);
    values_.assign(cells, 0.0);
    mask_.assign(cells, 0);
}

void PreorderTensor::check_cell(std::size_t item, int t, int h) const {
    if (item >= items_.size() || t < 0 || t >= periods_ || h < 0 || h >= max_lead_) {
        throw RangeError("cell (" + std::to_string(item) + ", " + std::to_string(t) + ", " +
                         std::to_string(h) + ") outside tensor of shape " +
                         std::to_string(items_.size()) + "x" + std::to_string(periods_) + "x" +
                         std::to_string(max_lead_));
    }
}

void PreorderTensor::set(std::size_t item, int t, int h, double quantity) {
    check_cell(item, t, h);
    if (!std::isfinite(quantity) || quantity < 0.0) {
        throw DomainError("quantity must be finite and non-negative");
    }
    values_[offset(item, t, h)] = quantity;
    mask_[offset(item, t, h)] = 1;
}

void PreorderTensor::assign(std::size_t item, int t, int h, double quantity) {
    check_cell(item, t, h);
    if (!std::isfinite(quantity) || quantity < 0.0) {
        throw DomainError("quantity must be finite and non-negative");
    }
    values_[offset(item, t, h)] = quantity;
}

std::vector<double> PreorderTensor::series(std::size_t item, int h) const {
    check_cell(item, 0, h);
    std::vector<double> out(static_cast<std::size_t>(periods_));
    for (int t = 0; t < periods_; ++t) {
        out[static_cast<std::size_t>(t)] = value(item, t, h);
    }
    return out;
}

std::vector<bool> PreorderTensor::observed_series(std::size_t item, int h) const {
    check_cell(item, 0, h);
    std::vector<bool> out(static_cast<std::size_t>(periods_));
    for (int t = 0; t < periods_; ++t) {
        out[static_cast<std::size_t>(t)] = observed(item, t, h);
    }
    return out;
}

std::optional<std::size_t> PreorderTensor::find_item(std::string_view id) const {
    const auto it = std::find(items_.begin(), items_.end(), id);
    if (it == items_.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - items_.begin());
}

PreorderTensor PreorderTensor::subset(const std::vector<std::size_t>& items) const {
    std::vector<std::string> ids;
    ids.reserve(items.size());
    for (const auto i : items) {
        if (i >= items_.size()) {
            throw RangeError("item index out of range");
        }
        ids.push_back(items_[i]);
    }
    PreorderTensor out(std::move(ids), periods_, max_lead_);
    const auto block = static_cast<std::size_t>(periods_) * static_cast<std::size_t>(max_lead_);
    for (std::size_t k = 0; k < items.size(); ++k) {
        std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(items[k] * block), block,
                    out.values_.begin() + static_cast<std::ptrdiff_t>(k * block));
        std::copy_n(mask_.begin() + static_cast<std::ptrdiff_t>(items[k] * block), block,
                    out.mask_.begin() + static_cast<std::ptrdiff_t>(k * block));
    }
    return out;
}

PreorderTensor PreorderTensor::truncate(int periods) const {
    if (periods < 0 || periods > periods_) {
        throw RangeError("cannot truncate to " + std::to_string(periods) + " periods");
    }
    PreorderTensor out(items_, periods, max_lead_);
    for (std::size_t i = 0; i < items_.size(); ++i) {
        for (int t = 0; t < periods; ++t) {
            for (int h = 0; h < max_lead_; ++h) {
                out.values_[out.offset(i, t, h)] = value(i, t, h);
                out.mask_[out.offset(i, t, h)] = mask_[offset(i, t, h)];
            }
        }
    }
    return out;
}

std::size_t PreorderTensor::observed_count() const {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1));
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return fields;
}

template<typename T>
T parse_number(std::string_view field, const char* name, std::size_t line) {
    T value{};
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end || field.empty()) {
        throw ParseError("invalid " + std::string(name) + " '" + std::string(field) + "'", line);
    }
    return value;
}

struct RawRecord {
    std::size_t item;
    int t;
    int h;
    double q;
    std::size_t line;
};

} // namespace

PreorderTensor parse_csv(std::istream& in, const LoadOptions& options, LoadStats* stats) {
    if (options.max_lead < 1) {
        throw ConfigError("max_lead must be at least 1");
    }
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<std::string> items;
    std::unordered_map<std::string, std::size_t> item_index;
    std::vector<RawRecord> records;
    LoadStats local;
    int max_t = -1;
    int max_h = -1;

    while (std::getline(in, line)) {
        ++line_no;
        const auto view = trim(line);
        if (view.empty()) {
            continue;
        }
        const auto fields = split_fields(view);
        if (!header_seen) {
            if (fields.size() != 4 || fields[0] != "item_id" || fields[1] != "delivery_period" ||
                fields[2] != "lead_time" || fields[3] != "quantity") {
                throw ParseError("expected header 'item_id,delivery_period,lead_time,quantity'",
                                 line_no);
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 4) {
            throw ParseError("expected 4 fields, found " + std::to_string(fields.size()), line_no);
        }
        if (fields[0].empty()) {
            throw ParseError("empty item_id", line_no);
        }
        const int t = parse_number<int>(fields[1], "delivery_period", line_no);
        const int h = parse_number<int>(fields[2], "lead_time", line_no);
        const double q = parse_number<double>(fields[3], "quantity", line_no);
        if (t < 0 || h < 0) {
            throw DomainError("line " + std::to_string(line_no) +
                              ": period and lead time must be non-negative");
        }
        if (!std::isfinite(q) || q < 0.0) {
            throw DomainError("line " + std::to_string(line_no) +
                              ": quantity must be finite and non-negative");
        }
        ++local.records;
        if (h >= options.max_lead) {
            ++local.dropped_records;
            continue;
        }
        const std::string id(fields[0]);
        auto [it, inserted] = item_index.try_emplace(id, items.size());
        if (inserted) {
            items.push_back(id);
        }
        records.push_back({it->second, t, h, q, line_no});
        max_t = std::max(max_t, t);
        max_h = std::max(max_h, h);
    }
    if (!header_seen) {
        throw ParseError("missing header", line_no + 1);
    }

    PreorderTensor tensor(std::move(items), max_t + 1, max_h + 1);
    for (const auto& r : records) {
        if (tensor.observed(r.item, r.t, r.h)) {
            throw DuplicateError("line " + std::to_string(r.line) + ": duplicate record for (" +
                                 tensor.items()[r.item] + ", " + std::to_string(r.t) + ", " +
                                 std::to_string(r.h) + ")");
        }
        tensor.set(r.item, r.t, r.h, r.q);
    }
    if (!options.missing_as_zero) {
        const auto cells = tensor.n_items() * static_cast<std::size_t>(tensor.periods()) *
                           static_cast<std::size_t>(tensor.max_lead());
        if (tensor.observed_count() != cells) {
            throw DomainError("missing records while missing_as_zero is disabled: " +
                              std::to_string(cells - tensor.observed_count()) + " cells absent");
        }
    }
    if (stats != nullptr) {
        *stats = local;
    }
    return tensor;
}

PreorderTensor load_csv(const std::filesystem::path& path, const LoadOptions& options,
                        LoadStats* stats) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    return parse_csv(in, options, stats);
}

void write_csv(std::ostream& out, const PreorderTensor& tensor) {
    out << "item_id,delivery_period,lead_time,quantity\n";
    std::array<char, 64> buf{};
    for (std::size_t i = 0; i < tensor.n_items(); ++i) {
        for (int t = 0; t < tensor.periods(); ++t) {
            for (int h = 0; h < tensor.max_lead(); ++h) {
                if (!tensor.observed(i, t, h)) {
                    continue;
                }
                const auto [end, ec] =
                    std::to_chars(buf.data(), buf.data() + buf.size(), tensor.value(i, t, h));
                out << tensor.items()[i] << ',' << t << ',' << h << ','
                    << std::string_view(buf.data(), static_cast<std::size_t>(end - buf.data()))
                    << '\n';
            }
        }
    }
}

void save_csv(const std::filesystem::path& path, const PreorderTensor& tensor) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    write_csv(out, tensor);
}

void save_cache(const std::filesystem::path& path, const PreorderTensor& tensor) {
    BinaryWriter w;
    w.u64(tensor.n_items());
    w.u32(static_cast<std::uint32_t>(tensor.periods()));
    w.u32(static_cast<std::uint32_t>(tensor.max_lead()));
    for (const auto& id : tensor.items()) {
        w.str(id);
    }
    for (std::size_t i = 0; i < tensor.n_items(); ++i) {
        for (int t = 0; t < tensor.periods(); ++t) {
            for (int h = 0; h < tensor.max_lead(); ++h) {
                w.u8(tensor.observed(i, t, h) ? 1 : 0);
                w.f64(tensor.value(i, t, h));
            }
        }
    }
    write_container(path, ContainerKind::tensor, w);
}

PreorderTensor load_cache(const std::filesystem::path& path) {
    auto r = read_container(path, ContainerKind::tensor);
    const auto n = r.u64();
    const auto periods = static_cast<int>(r.u32());
    const auto leads = static_cast<int>(r.u32());
    std::vector<std::string> items;
    for (std::uint64_t i = 0; i < n; ++i) {
        items.push_back(r.str());
    }
    PreorderTensor tensor(std::move(items), periods, leads);
    for (std::size_t i = 0; i < tensor.n_items(); ++i) {
        for (int t = 0; t < periods; ++t) {
            for (int h = 0; h < leads; ++h) {
                const bool obs = r.u8() != 0;
                const double v = r.f64();
                if (obs) {
                    tensor.set(i, t, h, v);
                } else {
                    tensor.assign(i, t, h, v);
                }
            }
        }
    }
    if (!r.done()) {
        throw FormatError("trailing bytes in tensor cache");
    }
    return tensor;
}

bool is_known_at(const PreorderTensor& tensor, std::size_t item, int t, int h, int now) {
    tensor.check_cell(item, t, h);
    return t - h <= now;
}

Regime parse_regime(std::string_view name) {
    if (name == "smooth") {
        return Regime::smooth;
    }
    if (name == "sparse-spiky" || name == "sparse_spiky") {
        return Regime::sparse_spiky;
    }
    if (name == "anticipatory") {
        return Regime::anticipatory;
    }
    throw ConfigError("unknown regime '" + std::string(name) +
                      "' (expected smooth, sparse-spiky or anticipatory)");
}

std::string_view to_string(Regime regime) {
    switch (regime) {
    case Regime::smooth:
        return "smooth";
    case Regime::sparse_spiky:
        return "sparse-spiky";
    case Regime::anticipatory:
        return "anticipatory";
    }
    return "unknown";
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw DimensionError("correlation of series with different lengths");
    }
    const auto n = static_cast<double>(a.size());
    if (a.empty()) {
        return 0.0;
    }
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) {
        return 0.0;
    }
    return sab / std::sqrt(saa * sbb);
}

namespace {

std::string item_name(std::size_t i, std::size_t n) {
    const auto width = std::to_string(std::max<std::size_t>(n, 1) - 1).size();
    auto digits = std::to_string(i);
    return "item_" + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

// Share of the total order volume placed h periods ahead.
double lead_share(int h, double decay) { return std::pow(decay, h); }

void fill_smooth(PreorderTensor& out, std::size_t i, Rng& rng) {
    const double level = rng.uniform(20.0, 200.0);
    const double amplitude = rng.uniform(0.0, 0.3);
    const double phase = rng.uniform(0.0, 6.283185307179586);
    const double decay = rng.uniform(0.6, 0.9);
    double noise = 0.0;
    for (int t = 0; t < out.periods(); ++t) {
        noise = 0.6 * noise + rng.normal(0.0, 0.05 * level);
        const double total =
            std::max(0.0, level * (1.0 + amplitude * std::sin(6.283185307179586 * t / 12.0 + phase)) +
                              noise);
        for (int h = 0; h < out.max_lead(); ++h) {
            const double q = total * lead_share(h, decay) * std::exp(rng.normal(0.0, 0.05));
            out.set(i, t, h, q);
        }
    }
}

void fill_sparse_spiky(PreorderTensor& out, std::size_t i, Rng& rng) {
    const double level = rng.uniform(5.0, 100.0);
    const double rate = rng.uniform(0.1, 0.35);
    const double decay = rng.uniform(0.4, 0.8);
    for (int t = 0; t < out.periods(); ++t) {
        const bool event = rng.bernoulli(rate);
        const double spike = std::exp(rng.normal(std::log(level), 0.8));
        for (int h = 0; h < out.max_lead(); ++h) {
            const bool keep = event && rng.bernoulli(0.8);
            const double q = keep ? spike * lead_share(h, decay) : 0.0;
            out.set(i, t, h, q);
        }
    }
}

void fill_anticipatory(PreorderTensor& out, std::size_t i, Rng& rng) {
    const double level = rng.uniform(50.0, 300.0);
    const double ahead = rng.uniform(0.75, 0.9); // share of demand pre-ordered one period ahead
    const double decay = rng.uniform(0.6, 0.85);
    double shock = 0.0;
    std::vector<double> q0(static_cast<std::size_t>(out.periods()));
    std::vector<double> q1(q0.size());
    for (int t = 0; t < out.periods(); ++t) {
        shock = 0.3 * shock + rng.normal(0.0, 0.35);
        const double demand = level * std::exp(shock);
        const double one_ahead = demand * ahead;
        const double net = demand * (1.0 - ahead) * std::exp(rng.normal(0.0, 0.2));
        q0[static_cast<std::size_t>(t)] = one_ahead + net;
        q1[static_cast<std::size_t>(t)] = one_ahead;
        double prev = one_ahead;
        for (int h = 2; h < out.max_lead(); ++h) {
            prev *= decay * std::exp(rng.normal(0.0, 0.15));
            out.set(i, t, h, prev);
        }
    }
    if (out.periods() >= 2 && correlation(q0, q1) < 0.9) {
        // Replace the net volume by its mean so q^0 tracks q^1 exactly.
        double mean_net = 0.0;
        for (std::size_t t = 0; t < q0.size(); ++t) {
            mean_net += q0[t] - q1[t];
        }
        mean_net /= static_cast<double>(q0.size());
        for (std::size_t t = 0; t < q0.size(); ++t) {
            q0[t] = q1[t] + mean_net;
        }
    }
    for (int t = 0; t < out.periods(); ++t) {
        out.set(i, t, 0, q0[static_cast<std::size_t>(t)]);
        if (out.max_lead() > 1) {
            out.set(i, t, 1, q1[static_cast<std::size_t>(t)]);
        }
    }
}

// Zeroes the smallest positive cells until at least half of all cells are 0.
void enforce_sparsity(PreorderTensor& out) {
    struct Cell {
        double q;
        std::size_t i;
        int t;
        int h;
    };
    std::vector<Cell> positive;
    std::size_t total = 0;
    for (std::size_t i = 0; i < out.n_items(); ++i) {
        for (int t = 0; t < out.periods(); ++t) {
            for (int h = 0; h < out.max_lead(); ++h) {
                ++total;
                if (out.value(i, t, h) > 0.0) {
                    positive.push_back({out.value(i, t, h), i, t, h});
                }
            }
        }
    }
    const std::size_t allowed = total / 2;
    if (positive.size() <= allowed) {
        return;
    }
    std::stable_sort(positive.begin(), positive.end(),
                     [](const Cell& a, const Cell& b) { return a.q < b.q; });
    for (std::size_t k = 0; k < positive.size() - allowed; ++k) {
        out.set(positive[k].i, positive[k].t, positive[k].h, 0.0);
    }
}

} // namespace

PreorderTensor synthesize(std::uint64_t seed, std::size_t n_items, int periods, int max_lead,
                          Regime regime) {
    if (n_items < 1 || periods < 1 || max_lead < 1) {
        throw RangeError("synthesize requires n_items, periods and max_lead >= 1");
    }
    std::vector<std::string> ids;
    ids.reserve(n_items);
    for (std::size_t i = 0; i < n_items; ++i) {
        ids.push_back(item_name(i, n_items));
    }
    PreorderTensor out(std::move(ids), periods, max_lead);
    for (std::size_t i = 0; i < n_items; ++i) {
        Rng rng(mix64(seed) ^ mix64(i + 1));
        switch (regime) {
        case Regime::smooth:
            fill_smooth(out, i, rng);
            break;
        case Regime::sparse_spiky:
            fill_sparse_spiky(out, i, rng);
            break;
        case Regime::anticipatory:
            fill_anticipatory(out, i, rng);
            break;
        }
    }
    if (regime == Regime::sparse_spiky) {
        enforce_sparsity(out);
    }
    return out;
}

} // namespace hierfcst::dataset
