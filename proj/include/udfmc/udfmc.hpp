#pragma once

#include "bvh.hpp"
#include "commands.hpp"
#include "diffgeom.hpp"
#include "extract.hpp"
#include "field.hpp"
#include "field_factory.hpp"
#include "fit.hpp"
#include "gradcheck.hpp"
#include "grid.hpp"
#include "io.hpp"
#include "kdtree.hpp"
#include "marching_cubes.hpp"
#include "mesh.hpp"
#include "mesh_udf.hpp"
#include "metrics.hpp"
#include "mlp_udf.hpp"
#include "parallel.hpp"
#include "parametric.hpp"
#include "postprocess.hpp"
#include "raster.hpp"
#include "sampling.hpp"
#include "vec3.hpp"
