// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_CORPUS_DATASET_IO_HPP
#define XLB_CORPUS_DATASET_IO_HPP

#include <filesystem>
#include <iosfwd>

#include "xlb/corpus/instance.hpp"

namespace xlb::corpus {

// JSON-lines layout: a header object {"task", "label_set"} on the first line,
// then one record per instance:
//   {"id", "language", "split", "words", "label"}   sentence classification
//   {"id", "language", "split", "words", "tags"}    sequence labeling
// Labels and tags are written as names from label_set.

void write_dataset(const Dataset& ds, std::ostream& out);
Dataset read_dataset(std::istream& in, Task task);

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path, Task task);

}  // namespace xlb::corpus

#endif  // XLB_CORPUS_DATASET_IO_HPP
