// Regenerates the committed specimen files under fixtures/. Everything is
// deterministic, so reruns reproduce the same bytes.

#include <cstdio>
#include <fstream>
#include <string>

#include "fixtures.hpp"
#include "shmtk/geometry.hpp"

using namespace shmtk;

namespace {

void write_program(const gcode::GCodeProgram& p, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    f << gcode::emit_gcode(p);
    std::printf("wrote %s\n", path.c_str());
}

} // namespace

int main(int argc, char** argv) {
    const std::string dir = argc > 1 ? argv[1] : "fixtures";
    write_program(fixtures::triangle_zigzag(), dir + "/triangle.gcode");
    write_program(fixtures::triangle_serpentine(), dir + "/triangle_serpentine.gcode");
    write_program(fixtures::key_gcode(3), dir + "/key.gcode");
    write_program(fixtures::sweep_gcode(), dir + "/sweep.gcode");
    write_program(fixtures::hold_pattern_gcode(), dir + "/holdpattern.gcode");
    {
        std::ofstream f(dir + "/corpus.gcode", std::ios::binary);
        f << fixtures::corpus_text();
        std::printf("wrote %s/corpus.gcode\n", dir.c_str());
    }
    geom::save_mask_pgm(fixtures::key_mask(), dir + "/key.pgm");
    std::printf("wrote %s/key.pgm (+.json)\n", dir.c_str());
    return 0;
}
