#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vecrl/rng.hpp"

namespace vecrl {

enum class DType { Float64, Int64, Bool };

// Named-tensor ring buffer of shape [capacity x num_envs x feature], usable
// as experience replay or rollout storage. Not bound to any agent; agents
// register the tensors they need. A single Memory may be shared by several
// writers, each adding its slice of a row at an env offset; the cursor
// advances once a row's columns are fully covered.
class Memory {
 public:
  Memory(std::size_t capacity, std::size_t num_envs, std::uint64_t seed);

  std::size_t capacity() const { return capacity_; }
  std::size_t num_envs() const { return num_envs_; }
  std::size_t cursor() const { return cursor_; }
  bool filled() const { return filled_; }

  std::size_t stored_rows() const { return filled_ ? capacity_ : cursor_; }
  std::size_t stored_count() const { return stored_rows() * num_envs_; }

  // Registers a zeroed tensor; any duplicate name is an error.
  void create_tensor(const std::string& name, std::size_t feature_dim,
                     DType dtype = DType::Float64);
  // Register-or-verify, for agents sharing one memory: a matching existing
  // registration is accepted, a conflicting one errors.
  void ensure_tensor(const std::string& name, std::size_t feature_dim,
                     DType dtype = DType::Float64);

  bool has_tensor(const std::string& name) const;
  std::size_t feature_dim(const std::string& name) const;
  DType dtype(const std::string& name) const;
  std::vector<std::string> tensor_names() const;

  // Writes one full row: every registered tensor gets [num_envs x feature].
  void add_samples(const std::map<std::string, std::span<const double>>& batch);
  // Writes columns [env_offset, env_offset + k) of the current row, k being
  // the leading dimension of the provided slices.
  void add_samples(const std::map<std::string, std::span<const double>>& batch,
                   std::size_t env_offset, std::size_t rows_in_batch);

  // batch_size (row, env) pairs uniform with replacement, the same pairs
  // applied to every requested tensor.
  std::map<std::string, std::vector<double>> sample(const std::vector<std::string>& names,
                                                    std::size_t batch_size);

  // A random permutation of all stored (row, env) pairs split into
  // num_minibatches chunks (earlier chunks take the remainder).
  std::vector<std::map<std::string, std::vector<double>>> sample_all(
      const std::vector<std::string>& names, std::size_t num_minibatches);

  // Full column read-back in insertion order (oldest first): [stored_count x
  // feature] for one tensor.
  std::vector<double> view_in_order(const std::string& name) const;

  // Replaces a tensor's stored values, data given in insertion order
  // ([stored_count x feature]). Used to fill derived columns (advantages,
  // returns) once a rollout is complete.
  void overwrite(const std::string& name, std::span<const double> data);

  void clear();

  // Columnar export in insertion order. "csv": header name[i] columns, one
  // line per transition. "binary": the tensor checkpoint container with
  // per-tensor dims [rows, num_envs, feature].
  void export_file(const std::string& path, const std::string& format) const;
  static Memory import_file(const std::string& path);

 private:
  struct Column {
    std::string name;
    std::size_t feature_dim;
    DType dtype;
    std::vector<double> data;  // [capacity * num_envs * feature]
  };

  const Column& column(const std::string& name) const;
  Column& column(const std::string& name);
  void advance_row();

  std::size_t capacity_;
  std::size_t num_envs_;
  std::size_t cursor_ = 0;
  bool filled_ = false;
  std::size_t row_fill_ = 0;  // columns of the in-progress row already written
  std::vector<Column> columns_;
  Rng rng_;
};

}  // namespace vecrl
