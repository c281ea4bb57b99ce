#pragma once

#include "meshparse/error.hpp"
#include "meshparse/geometry.hpp"
#include "meshparse/types.hpp"
#include "meshparse/parallel.hpp"
#include "meshparse/random.hpp"
#include "meshparse/label_space.hpp"
#include "meshparse/mesh_io.hpp"
#include "meshparse/image_io.hpp"
#include "meshparse/hash.hpp"
#include "meshparse/confusion.hpp"
#include "meshparse/metrics.hpp"
#include "meshparse/morton.hpp"
#include "meshparse/kdtree.hpp"
#include "meshparse/fps.hpp"
#include "meshparse/render.hpp"
#include "meshparse/dbscan.hpp"
#include "meshparse/fuse.hpp"
#include "meshparse/align.hpp"
#include "meshparse/synth.hpp"
#include "meshparse/bench.hpp"
#include "meshparse/pipeline.hpp"
