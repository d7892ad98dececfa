#include <fnfleet/common/process.hpp>

#include <boost/asio/io_context.hpp>
#include <boost/process.hpp>

#include <future>

namespace fnfleet {

namespace bp = boost::process;

ProcessResult run_process(const std::string& program, const std::vector<std::string>& args, std::string_view input)
{
    auto exe = program.find('/') == std::string::npos ? bp::search_path(program) : boost::filesystem::path(program);
    if (exe.empty()) {
        throw std::system_error(std::make_error_code(std::errc::no_such_file_or_directory), program);
    }
    boost::asio::io_context io;
    std::future<std::string> out;
    std::future<std::string> err;
    std::string stdin_data(input);
    bp::child child(exe, bp::args(args), bp::std_in < boost::asio::buffer(stdin_data), bp::std_out > out,
                    bp::std_err > err, io);
    io.run();
    child.wait();
    return ProcessResult{child.exit_code(), out.get(), err.get()};
}

} // namespace fnfleet
