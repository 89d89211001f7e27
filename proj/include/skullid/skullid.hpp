// SPDX-FileCopyrightText: 2026 skullid contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef SKULLID_SKULLID_HPP
#define SKULLID_SKULLID_HPP

#include "skullid/dataset.hpp"
#include "skullid/demo.hpp"
#include "skullid/error.hpp"
#include "skullid/evaluator.hpp"
#include "skullid/gallery.hpp"
#include "skullid/geometry.hpp"
#include "skullid/io.hpp"
#include "skullid/matcher.hpp"
#include "skullid/synth.hpp"
#include "skullid/voxel.hpp"

#endif  // SKULLID_SKULLID_HPP
