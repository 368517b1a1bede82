//! \file snapshot.hpp
//  \brief Versioned text serialization of sphere slices.
//
//  Format (line-oriented, whitespace separated, full double precision):
//    dnull-slice 1
//    meta  u  ubar  r  l_max  n_theta  n_phi
//    field <name> <spin> <count>
//    l  m  re  im          (count records)
//    ...                   (17 fields, fixed order)

#ifndef DNULL_SNAPSHOT_HPP_
#define DNULL_SNAPSHOT_HPP_

#include <iosfwd>
#include <string>

#include "dnull/geometry.hpp"

namespace dnull {

void write_slice(std::ostream& os, const SphereSlice& slice);
SphereSlice read_slice(std::istream& is);

void save_slice(const std::string& path, const SphereSlice& slice);
SphereSlice load_slice(const std::string& path);

}  // namespace dnull

#endif  // DNULL_SNAPSHOT_HPP_
