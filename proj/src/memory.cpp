#include "vecrl/memory.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "vecrl/checkpoint.hpp"

namespace vecrl {

namespace {

std::string dtype_tag(DType d) {
  switch (d) {
    case DType::Float64: return "f64";
    case DType::Int64: return "i64";
    case DType::Bool: return "bool";
  }
  return "f64";
}

DType dtype_from_tag(const std::string& tag) {
  if (tag == "f64") return DType::Float64;
  if (tag == "i64") return DType::Int64;
  if (tag == "bool") return DType::Bool;
  throw std::runtime_error("memory import: unknown dtype tag '" + tag + "'");
}

}  // namespace

Memory::Memory(std::size_t capacity, std::size_t num_envs, std::uint64_t seed)
    : capacity_(capacity), num_envs_(num_envs), rng_(seed) {
  if (capacity_ < 1) throw std::invalid_argument("Memory: capacity must be >= 1");
  if (num_envs_ < 1) throw std::invalid_argument("Memory: num_envs must be >= 1");
}

void Memory::create_tensor(const std::string& name, std::size_t feature_dim, DType dtype) {
  if (feature_dim < 1) throw std::invalid_argument("Memory: feature_dim must be >= 1");
  if (has_tensor(name)) {
    throw std::invalid_argument("Memory: tensor '" + name + "' already registered");
  }
  columns_.push_back({name, feature_dim, dtype,
                      std::vector<double>(capacity_ * num_envs_ * feature_dim, 0.0)});
}

void Memory::ensure_tensor(const std::string& name, std::size_t feature_dim, DType dtype) {
  if (!has_tensor(name)) {
    create_tensor(name, feature_dim, dtype);
    return;
  }
  const Column& col = column(name);
  if (col.feature_dim != feature_dim || col.dtype != dtype) {
    throw std::invalid_argument("Memory: tensor '" + name + "' already registered with dim " +
                                std::to_string(col.feature_dim) + "/" + dtype_tag(col.dtype) +
                                ", conflicting with dim " + std::to_string(feature_dim) + "/" +
                                dtype_tag(dtype));
  }
}

bool Memory::has_tensor(const std::string& name) const {
  for (const Column& c : columns_) {
    if (c.name == name) return true;
  }
  return false;
}

const Memory::Column& Memory::column(const std::string& name) const {
  for (const Column& c : columns_) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("Memory: unknown tensor '" + name + "'");
}

Memory::Column& Memory::column(const std::string& name) {
  return const_cast<Column&>(static_cast<const Memory*>(this)->column(name));
}

std::size_t Memory::feature_dim(const std::string& name) const { return column(name).feature_dim; }
DType Memory::dtype(const std::string& name) const { return column(name).dtype; }

std::vector<std::string> Memory::tensor_names() const {
  std::vector<std::string> names;
  names.reserve(columns_.size());
  for (const Column& c : columns_) names.push_back(c.name);
  return names;
}

void Memory::advance_row() {
  row_fill_ = 0;
  ++cursor_;
  if (cursor_ == capacity_) {
    cursor_ = 0;
    filled_ = true;
  }
}

void Memory::add_samples(const std::map<std::string, std::span<const double>>& batch) {
  add_samples(batch, 0, num_envs_);
}

void Memory::add_samples(const std::map<std::string, std::span<const double>>& batch,
                         std::size_t env_offset, std::size_t rows_in_batch) {
  if (columns_.empty()) throw std::logic_error("Memory: no tensors registered");
  if (env_offset + rows_in_batch > num_envs_) {
    throw std::invalid_argument("Memory: slice [" + std::to_string(env_offset) + ", " +
                                std::to_string(env_offset + rows_in_batch) +
                                ") exceeds num_envs " + std::to_string(num_envs_));
  }
  for (const Column& c : columns_) {
    auto it = batch.find(c.name);
    if (it == batch.end()) {
      throw std::invalid_argument("Memory: batch is missing tensor '" + c.name + "'");
    }
    if (it->second.size() != rows_in_batch * c.feature_dim) {
      throw std::invalid_argument("Memory: tensor '" + c.name + "' slice has " +
                                  std::to_string(it->second.size()) + " values, expected " +
                                  std::to_string(rows_in_batch * c.feature_dim));
    }
  }
  for (Column& c : columns_) {
    auto src = batch.at(c.name);
    double* dst = c.data.data() + (cursor_ * num_envs_ + env_offset) * c.feature_dim;
    std::copy(src.begin(), src.end(), dst);
  }
  row_fill_ += rows_in_batch;
  if (row_fill_ >= num_envs_) advance_row();
}

std::map<std::string, std::vector<double>> Memory::sample(const std::vector<std::string>& names,
                                                          std::size_t batch_size) {
  std::size_t count = stored_count();
  if (count == 0) throw std::logic_error("Memory: cannot sample from an empty memory");
  std::vector<std::size_t> flat(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    flat[i] = static_cast<std::size_t>(rng_.uniform_int(count));
  }
  std::map<std::string, std::vector<double>> out;
  for (const std::string& name : names) {
    const Column& c = column(name);
    std::vector<double> buf(batch_size * c.feature_dim);
    for (std::size_t i = 0; i < batch_size; ++i) {
      const double* src = c.data.data() + flat[i] * c.feature_dim;
      std::copy_n(src, c.feature_dim, buf.data() + i * c.feature_dim);
    }
    out.emplace(name, std::move(buf));
  }
  return out;
}

std::vector<std::map<std::string, std::vector<double>>> Memory::sample_all(
    const std::vector<std::string>& names, std::size_t num_minibatches) {
  std::size_t count = stored_count();
  if (count == 0) throw std::logic_error("Memory: cannot sample from an empty memory");
  if (num_minibatches < 1) throw std::invalid_argument("Memory: num_minibatches must be >= 1");

  std::vector<std::size_t> perm(count);
  for (std::size_t i = 0; i < count; ++i) perm[i] = i;
  for (std::size_t i = count; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng_.uniform_int(i));
    std::swap(perm[i - 1], perm[j]);
  }

  std::size_t base = count / num_minibatches;
  std::size_t remainder = count % num_minibatches;
  std::vector<std::map<std::string, std::vector<double>>> out;
  std::size_t offset = 0;
  for (std::size_t mb = 0; mb < num_minibatches && offset < count; ++mb) {
    std::size_t size = base + (mb < remainder ? 1 : 0);
    std::map<std::string, std::vector<double>> chunk;
    for (const std::string& name : names) {
      const Column& c = column(name);
      std::vector<double> buf(size * c.feature_dim);
      for (std::size_t i = 0; i < size; ++i) {
        const double* src = c.data.data() + perm[offset + i] * c.feature_dim;
        std::copy_n(src, c.feature_dim, buf.data() + i * c.feature_dim);
      }
      chunk.emplace(name, std::move(buf));
    }
    out.push_back(std::move(chunk));
    offset += size;
  }
  return out;
}

std::vector<double> Memory::view_in_order(const std::string& name) const {
  const Column& c = column(name);
  std::size_t rows = stored_rows();
  std::vector<double> out(rows * num_envs_ * c.feature_dim);
  std::size_t start = filled_ ? cursor_ : 0;
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t src_row = (start + r) % capacity_;
    std::copy_n(c.data.data() + src_row * num_envs_ * c.feature_dim,
                num_envs_ * c.feature_dim, out.data() + r * num_envs_ * c.feature_dim);
  }
  return out;
}

void Memory::clear() {
  cursor_ = 0;
  filled_ = false;
  row_fill_ = 0;
  for (Column& c : columns_) std::fill(c.data.begin(), c.data.end(), 0.0);
}

void Memory::export_file(const std::string& path, const std::string& format) const {
  if (stored_count() == 0) throw std::logic_error("Memory: refusing to export an empty memory");
  if (format == "csv") {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("Memory: cannot open " + path + " for writing");
    bool first = true;
    for (const Column& c : columns_) {
      for (std::size_t d = 0; d < c.feature_dim; ++d) {
        if (!first) out << ",";
        out << c.name << "[" << d << "]";
        first = false;
      }
    }
    out << "\n";
    std::vector<std::vector<double>> views;
    views.reserve(columns_.size());
    for (const Column& c : columns_) views.push_back(view_in_order(c.name));
    std::size_t transitions = stored_count();
    out.precision(17);
    for (std::size_t t = 0; t < transitions; ++t) {
      bool f = true;
      for (std::size_t ci = 0; ci < columns_.size(); ++ci) {
        std::size_t dim = columns_[ci].feature_dim;
        for (std::size_t d = 0; d < dim; ++d) {
          if (!f) out << ",";
          out << views[ci][t * dim + d];
          f = false;
        }
      }
      out << "\n";
    }
    if (!out) throw std::runtime_error("Memory: write failed for " + path);
    return;
  }
  if (format == "binary") {
    std::vector<std::pair<std::string, Tensor>> tensors;
    for (const Column& c : columns_) {
      tensors.emplace_back(c.name + ":" + dtype_tag(c.dtype),
                           Tensor::from_data({stored_rows(), num_envs_, c.feature_dim},
                                             view_in_order(c.name)));
    }
    save_tensors(path, tensors);
    return;
  }
  throw std::invalid_argument("Memory: unknown export format '" + format + "'");
}

Memory Memory::import_file(const std::string& path) {
  auto tensors = load_tensors(path);
  if (tensors.empty()) throw std::runtime_error("Memory: " + path + " holds no tensors");
  const Shape& shape = tensors.front().second.shape();
  if (shape.size() != 3) throw std::runtime_error("Memory: " + path + " is not a memory export");
  std::size_t rows = shape[0];
  std::size_t num_envs = shape[1];
  Memory mem(rows, num_envs, 0);
  for (auto& [tagged_name, tensor] : tensors) {
    auto pos = tagged_name.rfind(':');
    if (pos == std::string::npos || tensor.shape().size() != 3 || tensor.shape()[0] != rows ||
        tensor.shape()[1] != num_envs) {
      throw std::runtime_error("Memory: " + path + " has inconsistent tensor layout");
    }
    std::string name = tagged_name.substr(0, pos);
    DType dtype = dtype_from_tag(tagged_name.substr(pos + 1));
    mem.create_tensor(name, tensor.shape()[2], dtype);
    Column& col = mem.column(name);
    auto data = tensor.data();
    std::copy(data.begin(), data.end(), col.data.begin());
  }
  mem.cursor_ = 0;
  mem.filled_ = true;
  return mem;
}

}  // namespace vecrl
